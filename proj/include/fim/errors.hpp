#pragma once

#include <stdexcept>
#include <string>

namespace fim {

// Malformed input data (bad lines, unknown labels, broken files).
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, long line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    long line() const { return line_; }

  private:
    long line_;
};

// Structurally valid input that violates a contract (unknown user, bad k, ...).
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Non-finite loss or other numeric failure during training.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace fim
