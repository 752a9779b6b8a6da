#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace benchpress {

// Exception hierarchy. Each leaf maps onto one CLI exit code:
// ValidationError -> 1, InfeasibleError -> 2, IoError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Row and column are 1-based positions in the file.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column);

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

int exit_code_for(const std::exception& e) noexcept;

}  // namespace benchpress
