// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

namespace swm {
inline constexpr const char* version_string = "0.1.0";
}
