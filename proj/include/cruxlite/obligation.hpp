#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "cruxlite/ir.hpp"
#include "cruxlite/term.hpp"

namespace cruxlite {

enum class ObligationKind : std::uint8_t {
  Assert,
  Overflow,
  DivByZero,
  Bounds,
  Panic,
  Unreachable,
  SpecPrecondition,
};

std::string_view kind_name(ObligationKind k);

/// A claim that must hold whenever `context` (the path condition when it was
/// emitted) and the test's assumptions do.
struct Obligation {
  SourceSpan location;
  ObligationKind kind = ObligationKind::Assert;
  TermId claim;
  TermId context;
  std::string message;
  std::string function;
};

}  // namespace cruxlite
