#pragma once

#include <stdexcept>
#include <string>

namespace bpv {

// Bad user input: missing files, malformed lines, invalid configuration.
// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure at runtime (divergence, non-finite parameters).
// The CLI maps this to exit code 1.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bpv
