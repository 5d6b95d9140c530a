#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cruxlite/obligation.hpp"
#include "cruxlite/term.hpp"

namespace cruxlite {

enum class Backend : std::uint8_t { Internal, External };

struct SolverConfig {
  Backend backend = Backend::Internal;
  /// External solver command; `{file}` is replaced by a script path,
  /// otherwise the script is written to the process's standard input.
  std::string solver_cmd;
  std::uint64_t seed = 0;
  unsigned timeout_ms = 60000;
  /// When set, every solver query is also written there as SMT-LIB.
  std::string dump_dir;
  std::string dump_prefix = "query";
};

struct SolverStats {
  std::uint64_t queries = 0;
  std::uint64_t fast_path = 0;  // decided by construction, no solver call
  std::uint64_t solver_calls = 0;
  std::uint64_t vars = 0;
  std::uint64_t clauses = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
  double seconds = 0;

  void add(const SolverStats& o);
};

struct ModelEntry {
  std::string name;
  std::uint32_t ordinal = 0;
  Value value;
};

/// Satisfying assignment over named symbols, ascending ordinal.
struct Model {
  std::vector<ModelEntry> entries;

  Env env() const;
  const ModelEntry* find(const std::string& name) const;
};

/// Model over every symbol of the table; symbols missing from `env` get zero.
Model complete_model(const TermTable& tt, const Env& env);

enum class QueryStatus : std::uint8_t { Unsat, Sat, Unknown };

struct QueryResult {
  QueryStatus status = QueryStatus::Unknown;
  Env model;  // Sat: values of the symbols in the query
  std::string reason;
  bool fast_path = false;
};

/// Satisfiability checks against one TermTable with accumulated statistics.
class Solver {
 public:
  Solver(const TermTable& tt, SolverConfig cfg) : tt_(tt), cfg_(std::move(cfg)) {}

  QueryResult check(TermId query);

  const SolverConfig& config() const { return cfg_; }
  const SolverStats& stats() const { return stats_; }

 private:
  QueryResult check_internal(TermId query);
  QueryResult check_external(TermId query);

  const TermTable& tt_;
  SolverConfig cfg_;
  SolverStats stats_;
  unsigned dumped_ = 0;
};

struct CheckResult {
  bool valid = false;
  bool fast_path = false;
  Model model;  // counterexample when not valid
};

/// Discharge query: assumptions, context and the negated claim. Valid iff the
/// query is unsatisfiable. External Unknown raises EngineError.
CheckResult check_obligation(TermTable& tt, Solver& solver, std::span<const TermId> assumptions,
                             const Obligation& ob);

/// SMT-LIB2 script for the satisfiability of a Bool query. Aggregates are
/// emitted as their scalar components.
std::string emit_smtlib(const TermTable& tt, TermId query, bool request_model = false);

struct ExternalVerdict {
  QueryStatus status = QueryStatus::Unknown;
  Env model;  // keyed by the ordinal encoded in `|name!ordinal|`
  std::string output;
  std::string reason;
};

ExternalVerdict run_external(const std::string& command, const std::string& script, unsigned timeout_ms = 60000);
ExternalVerdict parse_solver_output(const std::string& output);

}  // namespace cruxlite
