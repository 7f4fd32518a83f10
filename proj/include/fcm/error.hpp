#pragma once

#include <stdexcept>
#include <string>

namespace fcm {

/// Base of every error the toolkit throws. The CLI maps the concrete
/// kind onto its exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (shapes, ranges, curve monotonicity).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Bad magic, unsupported version or malformed structure.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Structurally plausible data that is truncated or fails an integrity check.
class CorruptionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

/// Numerical domain problem (e.g. RD curves without a common interval).
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace fcm
