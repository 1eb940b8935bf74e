#pragma once

#include <stdexcept>
#include <string>

namespace reilly {

/// Raised when an operation's precondition or a domain invariant does not
/// hold (degenerate mesh, bad parameters, missing curvature, ...).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reilly
