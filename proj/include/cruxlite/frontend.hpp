#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cruxlite/ir.hpp"

namespace cruxlite {

struct ParseResult {
  std::optional<Program> program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return program.has_value(); }
};

/// Parse textual IR. On failure no program is returned; the first error is
/// reported with its location.
ParseResult parse(std::string_view text, const std::string& file = "<input>");

/// Canonical text; parse(print(p)) == p.
std::string print(const Program& p);

std::string print_sort(const Sort& s);
std::string print_rvalue(const Function& f, const Rvalue& rv);
std::string print_statement(const Function& f, const Statement& st);
std::string print_terminator(const Function& f, const Terminator& t);

/// Words the parser reserves; locals may not use them.
bool is_keyword(std::string_view word);

}  // namespace cruxlite
