#pragma once

#include <stdexcept>
#include <string>

namespace crowdteach {

/// Caller violated an operation's precondition (bad argument, duplicate
/// example, dimension mismatch, ...).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data parsed but violates a domain invariant (prior does not sum to
/// one, teaching set not realizable, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file contents. The message carries the line and/or field path.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem or network failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace crowdteach
