#pragma once

#include <stdexcept>
#include <string>

namespace crossmatch {

// Bad user input: malformed files, violated invariants, inconsistent configs.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace crossmatch
