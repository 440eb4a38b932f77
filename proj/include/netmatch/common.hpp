#pragma once

#include <stdexcept>
#include <string>

namespace netmatch {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user-supplied data: malformed files, out-of-range vertices, invalid options.
class InputError : public Error {
public:
    using Error::Error;
};

// A labeled graph exceeds the motif size cap.
class SizeError : public Error {
public:
    using Error::Error;
};

// An estimate is undefined (no matched groups, empty arm, ...).
class EstimationError : public Error {
public:
    using Error::Error;
};

}  // namespace netmatch
