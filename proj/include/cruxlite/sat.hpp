#pragma once

#include <cstdint>
#include <vector>

namespace cruxlite {

/// DIMACS-style CNF: variables 1..num_vars, literals are signed integers.
struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;

  int new_var() { return ++num_vars; }
  void add(std::vector<int> clause) { clauses.push_back(std::move(clause)); }
};

struct SatStats {
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t restarts = 0;
  std::uint64_t learned = 0;
};

struct SatResult {
  bool sat = false;
  std::vector<bool> model;  // indexed by variable, entry 0 unused
  SatStats stats;
  std::vector<std::vector<int>> learned;  // only when requested
};

struct SatOptions {
  std::uint64_t seed = 0;
  bool record_learned = false;
};

/// CDCL: two watched literals, first-UIP learning, VSIDS branching with phase
/// saving, geometric restarts, LBD-based learned clause reduction.
SatResult cdcl_solve(const Cnf& cnf, const SatOptions& opts = {});

/// True when `model` satisfies every clause.
bool satisfies(const Cnf& cnf, const std::vector<bool>& model);

}  // namespace cruxlite
