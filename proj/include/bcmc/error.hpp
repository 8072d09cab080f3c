#pragma once

#include <stdexcept>
#include <string>

namespace bcmc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raw input does not match the declared extent and scalar type.
class InputSizeError : public Error {
public:
    using Error::Error;
};

class InvalidDimsError : public Error {
public:
    using Error::Error;
};

class BoundsError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

class EncodeError : public Error {
public:
    using Error::Error;
};

class DecodeError : public Error {
public:
    using Error::Error;
};

/// Malformed container or packed vertex data.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A device allocation would exceed the device memory budget.
class OutOfMemoryError : public Error {
public:
    using Error::Error;
};

} // namespace bcmc
