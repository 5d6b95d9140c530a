#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cruxlite/interp.hpp"
#include "cruxlite/ir.hpp"
#include "cruxlite/memory.hpp"
#include "cruxlite/obligation.hpp"
#include "cruxlite/solver.hpp"
#include "cruxlite/term.hpp"

namespace cruxlite {

enum class Feasibility : std::uint8_t { IntervalOnly, IntervalThenSolver };

struct ExecConfig {
  unsigned max_unroll = 64;
  std::size_t ref_mux_cap = kDefaultRefMuxCap;
  Feasibility feasibility = Feasibility::IntervalThenSolver;
  SolverConfig solver;
  bool trace = false;  // record the concrete trace when replaying a refutation
};

/// A local's symbolic value: a term, or a guarded reference.
struct SymVal {
  TermId term;
  std::optional<GuardedRef> ref;
  bool is_ref() const { return ref.has_value(); }
};

/// Path-local machine state. Assumptions and obligations are global to a run
/// and live in the Executor.
struct ExecState {
  std::vector<std::optional<SymVal>> locals;
  Heap heap;
  TermId pc;
  bool alive = true;
  std::map<std::string, unsigned> occurrences;
  std::map<std::tuple<std::uint32_t, BlockId, BlockId>, unsigned> back_edges;
};

/// Symbol introduced by a `symbolic` statement. `key` identifies the dynamic
/// occurrence (function, block, statement, count) so concrete replay can
/// find the same values.
struct SymbolRecord {
  std::string key;
  std::string name;
  Sort sort;
  TermId term;
};

class Executor;

/// Call interception for compositional reasoning.
class CallHook {
 public:
  virtual ~CallHook() = default;
  /// Consulted for every call to a program function. Replace the call, or
  /// return nullopt to execute the callee's body.
  virtual std::optional<SymVal> on_call(Executor& ex, ExecState& s, const Function& callee,
                                        const std::vector<SymVal>& args, const SourceSpan& where) = 0;
  /// Validate an enable_spec statement naming a spec function; throw
  /// EngineError to reject.
  virtual void on_enable(Executor& ex, const std::string& spec, const SourceSpan& where) = 0;
};

class Executor {
 public:
  Executor(const Program& p, TermTable& tt, const ExecConfig& cfg, CallHook* hook = nullptr);
  ~Executor();

  /// Execute a parameterless entry function from the empty state.
  void run_entry(const Function& f);

  /// Execute a call: the body, an override or an intercepted summary.
  SymVal call(ExecState& s, const Function& f, const std::vector<SymVal>& args, const SourceSpan& where);
  /// Execute the function's body on the given arguments.
  SymVal exec_function(ExecState& s, const Function& f, const std::vector<SymVal>& args);

  ExecState merge_states(TermId c, TermId fork_pc, ExecState t, ExecState e, const std::string& where);
  SymVal mux(TermId c, const SymVal& a, const SymVal& b, const std::string& where);

  void emit(const ExecState& s, ObligationKind kind, TermId claim, const SourceSpan& where, std::string message,
            TermId guard = {});
  void assume(const ExecState& s, TermId cond);
  /// Is `cond` possible under the path condition and assumptions?
  bool feasible(const ExecState& s, TermId cond);
  TermId fresh(const std::string& name, const Sort& sort);
  /// Occurrence key of the call or symbolic statement being executed.
  const std::string& current_key() const { return key_; }
  void add_record(SymbolRecord r) { records_.push_back(std::move(r)); }

  TermTable& tt() { return tt_; }
  const Program& program() const { return prog_; }
  const ExecConfig& config() const { return cfg_; }
  Solver& solver() { return solver_; }
  const std::vector<TermId>& assumptions() const { return assumptions_; }
  const std::vector<Obligation>& obligations() const { return obligations_; }
  const std::vector<SymbolRecord>& symbol_records() const { return records_; }
  const std::set<std::string>& enabled_specs() const { return enabled_; }
  /// Number of times each function body was symbolically executed.
  const std::map<std::string, unsigned>& body_runs() const { return body_runs_; }

 private:
  struct FnInfo;
  struct Frame;

  const FnInfo& info(const Function& f);
  void run_region(Frame& fr, ExecState& s, BlockId b, BlockId stop);
  BlockId take_edge(Frame& fr, ExecState& s, BlockId from, BlockId to);
  void exec_statement(Frame& fr, ExecState& s, const Statement& st, BlockId b, std::size_t idx);
  SymVal eval_rvalue(ExecState& s, const Rvalue& rv, const Sort& dest_sort);
  SymVal operand(const ExecState& s, const Operand& o);
  TermId term_of(const ExecState& s, const Operand& o);
  const GuardedRef& ref_of(const ExecState& s, const Operand& o);
  void emit_checks(const ExecState& s, const std::vector<MemCheck>& checks, const SourceSpan& where);
  TermId override_call(const std::string& name, const std::vector<SymVal>& args);

  const Program& prog_;
  TermTable& tt_;
  ExecConfig cfg_;
  CallHook* hook_;
  Solver solver_;
  std::map<const Function*, std::unique_ptr<FnInfo>> infos_;
  std::vector<TermId> assumptions_;
  std::vector<Obligation> obligations_;
  std::vector<SymbolRecord> records_;
  std::set<std::string> enabled_;
  std::map<std::string, unsigned> body_runs_;
  std::map<std::string, unsigned> depth_;
  std::uint32_t activations_ = 0;
  AllocId next_alloc_ = 0;
  std::string key_;
  std::vector<std::string> fn_stack_;
};

// ---------------------------------------------------------------------------
// Test outcomes

enum class Verdict : std::uint8_t { Proven, Refuted, Vacuous, EngineError, Skipped };
std::string_view verdict_name(Verdict v);

struct ObligationResult {
  Obligation ob;
  bool valid = false;
  bool fast_path = false;
};

struct ReplayOutcome {
  bool confirmed = false;           // the named obligation failed concretely
  bool model_inconsistent = false;  // an assumption failed under the model
  std::string error;
  std::vector<ConcreteFailure> failures;
  std::vector<std::string> trace;
};

struct TestStats {
  std::uint64_t terms = 0;
  std::uint64_t obligations = 0;
  std::uint64_t assumptions = 0;
  std::map<std::string, unsigned> body_runs;
  SolverStats solver;
};

struct TestOutcome {
  std::string name;
  Verdict verdict = Verdict::EngineError;
  std::string reason;  // EngineError / Skipped explanation
  std::vector<ObligationResult> obligations;
  std::optional<std::size_t> failing;  // index into obligations
  Model model;
  std::optional<ReplayOutcome> replay;
  TestStats stats;
};

/// Replay hooks supplied by the compose layer for intercepted calls.
using ReplayHookFactory = std::function<InterpHooks(const Model& model, const Executor& ex)>;

/// Symbolically execute a test, discharge every obligation, check vacuity
/// and replay the first counterexample.
TestOutcome run_test(const Program& p, const Function& test, CallHook* hook, const ExecConfig& cfg,
                     const ReplayHookFactory& replay_hooks = {});

/// Hooks that make the interpreter read `symbolic` values from a model.
InterpHooks model_inputs(const TermTable& tt, const std::vector<SymbolRecord>& records, const Model& model);

ReplayOutcome concrete_replay(const Program& p, const Function& test, const InterpHooks& hooks,
                              const Obligation& target, bool trace);

}  // namespace cruxlite
