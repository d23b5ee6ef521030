#pragma once

#include <stdexcept>

namespace fpt {

// Violation of the round-alternation contract between tracer, game runner,
// pirates, and oracles (out-of-order calls, answers outside the allowed
// range, too many rounds).
struct ProtocolError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace fpt
