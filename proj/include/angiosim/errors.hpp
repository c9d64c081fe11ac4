#pragma once

#include <stdexcept>
#include <string>

namespace angiosim {

/// Raised when an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Filesystem failures (unwritable directories, unreadable files).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed image files. The message names the offending header field.
class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear-algebra failures (e.g. a matrix square root of an indefinite product).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace angiosim
