#pragma once

#include <stdexcept>
#include <string>

namespace facehop {

// Base for everything thrown by this library. The CLI maps subtypes to
// stable exit codes: ValidationError -> 1, IoError -> 2, CorruptModelError -> 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad inputs: dimension mismatches, out-of-range values, malformed configs.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Filesystem and decoding failures.
class IoError : public Error {
public:
    using Error::Error;
};

// Model container failures, with a reason the tests can distinguish.
class CorruptModelError : public Error {
public:
    enum class Reason { BadMagic, UnsupportedVersion, Truncated, ChecksumMismatch, Malformed };

    CorruptModelError(Reason reason, const std::string& msg) : Error(msg), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

}  // namespace facehop
