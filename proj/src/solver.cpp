#include "cruxlite/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cruxlite/blast.hpp"
#include "cruxlite/error.hpp"
#include "cruxlite/sat.hpp"

namespace cruxlite {

std::string_view kind_name(ObligationKind k) {
  switch (k) {
    case ObligationKind::Assert: return "assert";
    case ObligationKind::Overflow: return "overflow";
    case ObligationKind::DivByZero: return "div-by-zero";
    case ObligationKind::Bounds: return "bounds";
    case ObligationKind::Panic: return "panic";
    case ObligationKind::Unreachable: return "unreachable";
    case ObligationKind::SpecPrecondition: return "spec-precondition";
  }
  return "?";
}

void SolverStats::add(const SolverStats& o) {
  queries += o.queries;
  fast_path += o.fast_path;
  solver_calls += o.solver_calls;
  vars += o.vars;
  clauses += o.clauses;
  conflicts += o.conflicts;
  decisions += o.decisions;
  propagations += o.propagations;
  seconds += o.seconds;
}

Env Model::env() const {
  Env e;
  for (const auto& m : entries) e[m.ordinal] = m.value;
  return e;
}

const ModelEntry* Model::find(const std::string& name) const {
  for (const auto& m : entries) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

Model complete_model(const TermTable& tt, const Env& env) {
  Model m;
  for (const auto& s : tt.symbols()) {
    auto it = env.find(s.ordinal);
    m.entries.push_back({s.name, s.ordinal, it != env.end() ? it->second : Value::zero(s.sort)});
  }
  return m;
}

QueryResult Solver::check(TermId query) {
  ++stats_.queries;
  QueryResult res;
  if (tt_.is_false(query) || tt_.is_true(query)) {
    ++stats_.fast_path;
    res.status = tt_.is_false(query) ? QueryStatus::Unsat : QueryStatus::Sat;
    res.fast_path = true;
    return res;
  }
  if (!cfg_.dump_dir.empty()) {
    std::filesystem::create_directories(cfg_.dump_dir);
    char name[64];
    std::snprintf(name, sizeof name, "-%04u.smt2", dumped_++);
    std::ofstream(std::filesystem::path(cfg_.dump_dir) / (cfg_.dump_prefix + name)) << emit_smtlib(tt_, query, true);
  }
  auto t0 = std::chrono::steady_clock::now();
  res = cfg_.backend == Backend::Internal ? check_internal(query) : check_external(query);
  stats_.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ++stats_.solver_calls;
  return res;
}

QueryResult Solver::check_internal(TermId query) {
  Blaster b(tt_);
  b.assert_lit(b.lit(query));
  SatOptions opts;
  opts.seed = cfg_.seed;
  SatResult r = cdcl_solve(b.cnf(), opts);
  stats_.vars += static_cast<std::uint64_t>(b.cnf().num_vars);
  stats_.clauses += b.cnf().clauses.size();
  stats_.conflicts += r.stats.conflicts;
  stats_.decisions += r.stats.decisions;
  stats_.propagations += r.stats.propagations;
  QueryResult res;
  res.status = r.sat ? QueryStatus::Sat : QueryStatus::Unsat;
  if (r.sat) res.model = b.decode(r.model);
  return res;
}

QueryResult Solver::check_external(TermId query) {
  if (cfg_.solver_cmd.empty()) throw EngineError("external backend selected but no solver command configured");
  ExternalVerdict v = run_external(cfg_.solver_cmd, emit_smtlib(tt_, query, true), cfg_.timeout_ms);
  QueryResult res;
  res.status = v.status;
  res.reason = v.reason;
  if (v.status == QueryStatus::Sat) {
    // Keep only symbols the table knows; fill the query's symbols the
    // solver left out (it may omit irrelevant ones).
    for (TermId s : tt_.symbols_in(query)) {
      const auto& n = tt_.node(s);
      auto it = v.model.find(n.ordinal);
      res.model[n.ordinal] = it != v.model.end() && it->second.sort() == n.sort ? it->second : Value::zero(n.sort);
    }
  }
  return res;
}

namespace {

using SymMap = std::unordered_map<TermId, TermId, TermIdHash>;

void split_eq(TermTable& tt, TermId a, TermId b, std::vector<std::pair<TermId, TermId>>& out) {
  Sort s = tt.sort(a);
  if (s.kind() == SortKind::Array || s.kind() == SortKind::Tuple || s.kind() == SortKind::Record) {
    auto xs = tt.explode(a), ys = tt.explode(b);
    for (std::size_t i = 0; i < xs.size(); ++i) split_eq(tt, xs[i], ys[i], out);
    return;
  }
  out.emplace_back(a, b);
}

// Symbols defined by a top-level equality among the assumptions, so that two
// copies of an input tied by `assume x == y` reach the solver as one.
SymMap defining_equalities(TermTable& tt, std::span<const TermId> assumptions) {
  std::vector<std::pair<TermId, TermId>> eqs;
  for (TermId a : assumptions) {
    for (TermId c : tt.conjuncts(a)) {
      if (tt.op(c) == Op::Eq) split_eq(tt, tt.node(c).children[0], tt.node(c).children[1], eqs);
    }
  }
  SymMap map;
  for (auto [x, y] : eqs) {
    x = tt.substitute(x, map);
    y = tt.substitute(y, map);
    if (x == y) continue;
    bool xs = tt.op(x) == Op::Symbol, ys = tt.op(y) == Op::Symbol;
    if (!xs && !ys) continue;
    // eliminate the later symbol when both sides are symbols
    if (!xs || (ys && y.index > x.index)) std::swap(x, y);
    auto free = tt.symbols_in(y);
    if (std::find(free.begin(), free.end(), x) != free.end()) continue;
    SymMap one{{x, y}};
    for (auto& [k, v] : map) v = tt.substitute(v, one);
    map[x] = y;
  }
  return map;
}

}  // namespace

CheckResult check_obligation(TermTable& tt, Solver& solver, std::span<const TermId> assumptions,
                             const Obligation& ob) {
  SymMap defs = defining_equalities(tt, assumptions);
  std::vector<TermId> parts(assumptions.begin(), assumptions.end());
  parts.push_back(ob.context);
  parts.push_back(tt.mk_not(ob.claim));
  TermId query = tt.mk_and_all(parts);
  if (!defs.empty()) query = tt.substitute(query, defs);
  QueryResult q = solver.check(query);
  CheckResult out;
  out.fast_path = q.fast_path;
  if (q.status == QueryStatus::Unknown) {
    throw EngineError("solver returned unknown for " + std::string(kind_name(ob.kind)) + " obligation at " +
                      ob.location.str() + (q.reason.empty() ? "" : ": " + q.reason));
  }
  out.valid = q.status == QueryStatus::Unsat;
  if (!out.valid) {
    Env env = q.model;
    for (const auto& s : tt.symbols()) {
      if (!env.count(s.ordinal) && !defs.count(s.term)) env.emplace(s.ordinal, Value::zero(s.sort));
    }
    for (const auto& [sym, def] : defs) env[tt.node(sym).ordinal] = tt.eval(def, env);
    out.model = complete_model(tt, env);
  }
  return out;
}

// ---------------------------------------------------------------------------
// External solver bridge

namespace {

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;
};

class SExprParser {
 public:
  explicit SExprParser(const std::string& s) : s_(s) {}

  bool next(SExpr& out) {
    skip();
    if (pos_ >= s_.size()) return false;
    out = parse();
    return true;
  }

 private:
  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else if (s_[pos_] == ';') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  SExpr parse() {
    SExpr e;
    skip();
    if (pos_ >= s_.size()) throw std::runtime_error("unexpected end of solver output");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      e.is_list = true;
      while (true) {
        skip();
        if (pos_ >= s_.size()) throw std::runtime_error("unbalanced parenthesis in solver output");
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        e.list.push_back(parse());
      }
    } else if (c == ')') {
      throw std::runtime_error("unexpected ')' in solver output");
    } else if (c == '|') {
      std::size_t end = s_.find('|', pos_ + 1);
      if (end == std::string::npos) throw std::runtime_error("unterminated quoted symbol");
      e.atom = s_.substr(pos_ + 1, end - pos_ - 1);
      pos_ = end + 1;
    } else if (c == '"') {
      std::size_t end = pos_ + 1;
      while (end < s_.size() && s_[end] != '"') ++end;
      e.atom = s_.substr(pos_, end + 1 - pos_);
      pos_ = end + 1;
    } else {
      std::size_t start = pos_;
      while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
             s_[pos_] != ')') {
        ++pos_;
      }
      e.atom = s_.substr(start, pos_ - start);
    }
    return e;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

u128 parse_digits(const std::string& s, unsigned base) {
  u128 v = 0;
  for (char c : s) {
    unsigned d;
    if (c >= '0' && c <= '9') {
      d = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      d = static_cast<unsigned>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      d = static_cast<unsigned>(c - 'A' + 10);
    } else {
      throw std::runtime_error("bad digit in solver value " + s);
    }
    if (d >= base) throw std::runtime_error("bad digit in solver value " + s);
    v = v * base + d;
  }
  return v;
}

bool decode_value(const SExpr& sort, const SExpr& val, Value& out) {
  if (!sort.is_list && sort.atom == "Bool") {
    if (val.is_list || (val.atom != "true" && val.atom != "false")) return false;
    out = Value::boolean(val.atom == "true");
    return true;
  }
  if (!sort.is_list || sort.list.size() != 3 || sort.list[1].atom != "BitVec") return false;
  auto w = static_cast<unsigned>(std::stoul(sort.list[2].atom));
  if (!val.is_list) {
    const std::string& a = val.atom;
    if (a.rfind("#x", 0) == 0) {
      out = Value::bitvec(parse_digits(a.substr(2), 16), w);
    } else if (a.rfind("#b", 0) == 0) {
      out = Value::bitvec(parse_digits(a.substr(2), 2), w);
    } else {
      return false;
    }
    return true;
  }
  // (_ bvN w)
  if (val.list.size() == 3 && val.list[0].atom == "_" && val.list[1].atom.rfind("bv", 0) == 0) {
    out = Value::bitvec(parse_digits(val.list[1].atom.substr(2), 10), w);
    return true;
  }
  return false;
}

void collect_defs(const SExpr& e, Env& model) {
  if (!e.is_list) return;
  if (e.list.size() == 5 && !e.list[0].is_list && e.list[0].atom == "define-fun" && e.list[2].is_list &&
      e.list[2].list.empty()) {
    const std::string& name = e.list[1].atom;
    std::size_t bang = name.rfind('!');
    if (bang == std::string::npos) return;
    std::uint32_t ord;
    try {
      ord = static_cast<std::uint32_t>(std::stoul(name.substr(bang + 1)));
    } catch (const std::exception&) {
      return;
    }
    Value v;
    if (decode_value(e.list[3], e.list[4], v)) model[ord] = v;
    return;
  }
  for (const auto& c : e.list) collect_defs(c, model);
}

}  // namespace

ExternalVerdict parse_solver_output(const std::string& output) {
  ExternalVerdict v;
  v.output = output;
  try {
    SExprParser p(output);
    SExpr first;
    if (!p.next(first) || first.is_list) {
      v.reason = "unparseable solver output: " + output;
      return v;
    }
    if (first.atom == "unsat") {
      v.status = QueryStatus::Unsat;
    } else if (first.atom == "sat") {
      v.status = QueryStatus::Sat;
      SExpr e;
      while (p.next(e)) collect_defs(e, v.model);
    } else {
      v.reason = "solver answered: " + output;
    }
  } catch (const std::exception& ex) {
    v.status = QueryStatus::Unknown;
    v.reason = std::string(ex.what()) + ": " + output;
  }
  return v;
}

ExternalVerdict run_external(const std::string& command, const std::string& script, unsigned timeout_ms) {
  ExternalVerdict fail;
  std::string cmd = command;
  std::string tmp;
  bool via_file = cmd.find("{file}") != std::string::npos;
  if (via_file) {
    char path[] = "/tmp/cruxlite-XXXXXX";
    int fd = mkstemp(path);
    if (fd < 0) {
      fail.reason = "cannot create temporary script file";
      return fail;
    }
    tmp = path;
    ssize_t n = ::write(fd, script.data(), script.size());
    ::close(fd);
    if (n != static_cast<ssize_t>(script.size())) {
      std::filesystem::remove(tmp);
      fail.reason = "cannot write temporary script file";
      return fail;
    }
    for (std::size_t at; (at = cmd.find("{file}")) != std::string::npos;) cmd.replace(at, 6, tmp);
  }
  int in[2], out[2];
  if (pipe(in) != 0 || pipe(out) != 0) {
    fail.reason = "pipe failed";
    return fail;
  }
  pid_t pid = fork();
  if (pid < 0) {
    fail.reason = "fork failed";
    return fail;
  }
  if (pid == 0) {
    dup2(in[0], 0);
    dup2(out[1], 1);
    dup2(out[1], 2);
    close(in[0]);
    close(in[1]);
    close(out[0]);
    close(out[1]);
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in[0]);
  close(out[1]);
  signal(SIGPIPE, SIG_IGN);
  if (!via_file) {
    std::size_t off = 0;
    while (off < script.size()) {
      ssize_t n = ::write(in[1], script.data() + off, script.size() - off);
      if (n <= 0) break;
      off += static_cast<std::size_t>(n);
    }
  }
  close(in[1]);
  std::string output;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  bool timed_out = false;
  char buf[4096];
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{out[0], POLLIN, 0};
    int r = poll(&pfd, 1, static_cast<int>(left.count()));
    if (r == 0) {
      timed_out = true;
      break;
    }
    if (r < 0) continue;
    ssize_t n = ::read(out[0], buf, sizeof buf);
    if (n <= 0) break;
    output.append(buf, static_cast<std::size_t>(n));
  }
  close(out[0]);
  if (timed_out) kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  if (!tmp.empty()) std::filesystem::remove(tmp);
  if (timed_out) {
    fail.reason = "timeout after " + std::to_string(timeout_ms) + " ms";
    fail.output = output;
    return fail;
  }
  ExternalVerdict v = parse_solver_output(output);
  if (v.status == QueryStatus::Unknown && WIFEXITED(status) && WEXITSTATUS(status) != 0) {
    v.reason = "solver exited with status " + std::to_string(WEXITSTATUS(status)) + ": " + output;
  }
  return v;
}

}  // namespace cruxlite
