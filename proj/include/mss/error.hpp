// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace mss {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Operands have incompatible fingerprint lengths.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An argument is outside its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Index construction rejected the input (duplicate ids, empty database, ...).
class BuildError : public Error {
public:
    using Error::Error;
};

/// Operation not valid for the object's current state.
class StateError : public Error {
public:
    using Error::Error;
};

/// Input file could not be parsed; message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Dequeue from an empty queue.
class UnderflowError : public Error {
public:
    using Error::Error;
};

} // namespace mss
