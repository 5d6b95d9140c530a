#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cruxlite/ir.hpp"
#include "cruxlite/obligation.hpp"
#include "cruxlite/value.hpp"

namespace cruxlite {

struct ConcreteFailure {
  ObligationKind kind = ObligationKind::Assert;
  SourceSpan location;
  std::string message;
  std::string function;
};

class Interpreter;

struct InterpHooks {
  /// Value of a `symbolic` statement; `key` names the dynamic occurrence.
  std::function<Value(const std::string& key, const std::string& name, const Sort& sort)> symbolic;
  /// Called for every call whose callee has an enabled spec; nullopt runs
  /// the body.
  std::function<std::optional<Value>(Interpreter& in, const Function& callee, const std::vector<Value>& args,
                                     const std::string& key, const SourceSpan& where)>
      call;
};

struct InterpOptions {
  bool trace = false;
  std::uint64_t max_steps = 100'000'000;
  unsigned max_depth = 256;
};

struct InterpResult {
  enum class Status : std::uint8_t { Completed, AssumptionFailed, Error };
  Status status = Status::Completed;
  std::vector<ConcreteFailure> failures;  // in execution order
  std::string error;
  std::vector<std::string> trace;
};

/// Reference concrete interpreter. Failed checks are recorded and execution
/// continues with the same total semantics the symbolic engine uses; panic and
/// unreachable end the run; a false assumption stops it.
class Interpreter {
 public:
  Interpreter(const Program& p, InterpHooks hooks, InterpOptions opts = {});

  InterpResult run(const Function& f);

  Value call(const Function& f, const std::vector<Value>& args);
  void fail(ObligationKind kind, const SourceSpan& where, std::string message);
  [[noreturn]] void assumption_failed();
  const std::set<std::string>& enabled() const { return enabled_; }
  /// The spec last enabled for `target`, empty when none.
  std::string enabled_spec(const std::string& target) const;
  const Program& program() const { return prog_; }

 private:
  struct Frame;
  Value exec_body(const Function& f, const std::vector<Value>& args);
  void exec_statement(Frame& fr, const Statement& st, const Block& b, std::size_t idx);
  Value eval_rvalue(Frame& fr, const Rvalue& rv, const Sort& dest_sort);
  Value operand(const Frame& fr, const Operand& o) const;
  Value& deref(Frame& fr, const Value& ref, const SourceSpan& where, bool& in_bounds);
  Value call_site(Frame& fr, const Rvalue& rv, const std::string& key);
  void record(const std::string& line);

  const Program& prog_;
  InterpHooks hooks_;
  InterpOptions opts_;
  std::vector<Value> heap_;
  Value scratch_;
  std::set<std::string> enabled_;
  std::map<std::string, std::string> enabled_by_;
  std::map<std::string, unsigned> occurrences_;
  std::vector<ConcreteFailure> failures_;
  std::vector<std::string> trace_;
  std::uint64_t steps_ = 0;
  unsigned depth_ = 0;
};

/// Semantics of one primitive opcode over concrete values.
Value concrete_prim(Op op, const Sort& result, u128 param, const std::vector<Value>& args);
Value concrete_override(const std::string& name, const std::vector<Value>& args);

/// Key of the `count`-th execution of the statement at (function, block, idx).
std::string occurrence_key(const std::string& fn, const std::string& block, std::size_t idx, unsigned count);

}  // namespace cruxlite
