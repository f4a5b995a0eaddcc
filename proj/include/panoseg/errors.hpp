#pragma once

#include <stdexcept>
#include <string>

namespace panoseg {

// Thrown when an input file or byte stream cannot be decoded. Messages name
// the offending token, line, or byte offset.
class parse_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Thrown when arguments or data violate an operation's contract
// (out-of-range parameter, dimension mismatch, non-finite coordinate, ...).
class validation_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace panoseg
