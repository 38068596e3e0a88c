// Copyright (c) 2026 the swm-receiver authors.
// Licensed under the Apache License, Version 2.0; see LICENSE for details.

#pragma once

#include <stdexcept>
#include <string>

namespace swm {

/// Invalid or inconsistent configuration (missing drive, unknown key, ...).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver hit a singular system or vanishing denominator.
class SingularityError : public std::runtime_error {
  public:
    explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

/// The Liouvillian null space has dimension != 1.
class DegenerateSteadyStateError : public std::runtime_error {
  public:
    DegenerateSteadyStateError(const std::string& what, int dimension)
        : std::runtime_error(what), null_space_dimension(dimension) {}
    int null_space_dimension;
};

/// Numerical routine failed to converge or bracket its target.
class NumericalError : public std::runtime_error {
  public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace swm
