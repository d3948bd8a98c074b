#pragma once

#include <stdexcept>
#include <string>

namespace sgpl {

// Bad user input: files, configs, arguments. CLI exit code 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Estimation broke down on otherwise valid input. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sgpl
