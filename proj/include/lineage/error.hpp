#pragma once

#include <stdexcept>
#include <string>

namespace lineage {

// Base for every error raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class CapacityError : public Error {
public:
    using Error::Error;
};

// Bad argument values: out-of-range severities, mismatched trait lengths...
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace lineage
