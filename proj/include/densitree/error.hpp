#pragma once

#include <stdexcept>
#include <string>

namespace densitree {

// Base for every domain failure raised by the library. The CLI maps these to
// exit status 1; argument parsing problems are ParseError (status 2).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A query needed data past the configured evaluation horizon.
class HorizonError : public Error {
public:
    using Error::Error;
};

// Inputs violate a documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// An exhaustive or branch-and-bound search refused to run past its cap.
class SearchCapError : public Error {
public:
    using Error::Error;
};

// Malformed textual input (set descriptors, rationals, bit-strings).
class ParseError : public Error {
public:
    using Error::Error;
};

// Arithmetic left the representable range of the chosen integer type.
class OverflowError : public Error {
public:
    using Error::Error;
};

}  // namespace densitree
