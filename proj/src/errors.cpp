#include "benchpress/errors.hpp"

namespace benchpress {

ParseError::ParseError(const std::string& what, std::size_t row, std::size_t column)
    : ValidationError(what + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
      row_(row),
      column_(column) {}

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const IoError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const InfeasibleError*>(&e) != nullptr) return 2;
  return 1;
}

}  // namespace benchpress
