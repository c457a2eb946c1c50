/**
 * @file
 * @brief Error taxonomy shared by the library and the CLI.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <stdexcept>
#include <string>

namespace pine {

// Malformed or inconsistent input data (bad UTF-8, bad model file, empty
// vocabulary, ...). Mapped to exit code 2 by the CLI.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite parameters or gradients. Mapped to exit code 3 by the CLI.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pine
