#pragma once

#include <stdexcept>
#include <string>

namespace curvid {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Point outside the chart domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// |det g| below the non-degeneracy floor, or a signature mismatch.
class DegenerateMetricError : public Error {
public:
    using Error::Error;
};

/// Requested jet order unavailable or too low for the operation.
class OrderError : public Error {
public:
    using Error::Error;
};

/// Operation called in a dimension it does not support.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid catalog name or parameter, or invalid run configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

}  // namespace curvid
