#pragma once

#include <stdexcept>
#include <string>

namespace noonsim {

// Base of every error the library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};
struct LevelError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
// Bad physical parameters (negative rates, ω_s2 <= 0, ...).
struct ParameterError : Error {
    using Error::Error;
};
struct ScheduleError : ParameterError {
    using ParameterError::ParameterError;
};
struct TruncationError : Error {
    using Error::Error;
};
// Trace drift, negative overlaps and similar numerical failures.
struct IntegrityError : Error {
    using Error::Error;
};
struct StiffnessError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace noonsim
