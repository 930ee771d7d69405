#pragma once

#include <stdexcept>
#include <string>

namespace sck {

// Malformed input data: unresolved ids, duplicate ids, non-total tables,
// ill-shaped JSON.  The message names the offending id or key.
struct structural_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Well-formed data that violates a required mathematical axiom or invariant;
// the message carries a witness.
struct axiom_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric comparison that could not be decided at the configured precision.
struct precision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A state the algorithms should never reach; indicates a bug in this library,
// not bad input.
struct internal_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sck
