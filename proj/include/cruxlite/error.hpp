#pragma once

#include <stdexcept>
#include <string>

namespace cruxlite {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Ill-sorted term construction or invalid selector.
struct SortError : Error {
  using Error::Error;
};

/// Evaluation failure (missing symbol binding, ill-formed value).
struct EvalError : Error {
  using Error::Error;
};

/// Symbolic execution cannot continue: unroll bound, ref-mux explosion,
/// unsupported construct, dead allocation access.
struct EngineError : Error {
  using Error::Error;
};

/// Summary extraction rejected the spec test.
struct ExtractionError : Error {
  using Error::Error;
};

}  // namespace cruxlite
