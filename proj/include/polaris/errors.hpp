#pragma once

#include <stdexcept>
#include <string>

namespace polaris {

// Malformed or inconsistent input data. The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace polaris
