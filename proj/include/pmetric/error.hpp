#pragma once

#include <stdexcept>
#include <string>

namespace pmetric {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structural problems with an input graph or triangulation.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Numerical or mathematical preconditions that do not hold
// (reducible shift, non-positive potential, non-hyperbolic element, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// An enumeration would exceed its configured cap.
class ResourceLimit : public Error {
public:
    using Error::Error;
};

// Malformed files or unreadable paths.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace pmetric
