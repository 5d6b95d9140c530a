#include "cruxlite/exec.hpp"

#include <algorithm>
#include <functional>

#include "cruxlite/error.hpp"

namespace cruxlite {

struct Executor::FnInfo {
  PostDominators pd;
  std::set<std::pair<BlockId, BlockId>> back_edges;
  std::set<BlockId> headers;
};

struct Executor::Frame {
  const Function* fn;
  const FnInfo* info;
  std::uint32_t activation;
  std::vector<std::pair<ExecState, SymVal>> exits;
};

namespace {

template <class K>
void max_merge(std::map<K, unsigned>& into, const std::map<K, unsigned>& from) {
  for (const auto& [k, v] : from) {
    auto& slot = into[k];
    slot = std::max(slot, v);
  }
}

std::string location(const Function& f, const Block& b) {
  return f.name + ":" + b.label + (b.span.line ? " (" + b.span.str() + ")" : "");
}

}  // namespace

Executor::Executor(const Program& p, TermTable& tt, const ExecConfig& cfg, CallHook* hook)
    : prog_(p), tt_(tt), cfg_(cfg), hook_(hook), solver_(tt, cfg.solver) {
  if (cfg_.max_unroll < 1) throw EngineError("max_unroll must be at least 1");
}

Executor::~Executor() = default;

const Executor::FnInfo& Executor::info(const Function& f) {
  auto it = infos_.find(&f);
  if (it != infos_.end()) return *it->second;
  auto fi = std::make_unique<FnInfo>();
  fi->pd = immediate_postdominators(f);
  // DFS from the entry; an edge into a block on the stack is a back edge.
  std::vector<std::uint8_t> color(f.blocks.size(), 0);
  std::vector<std::pair<BlockId, std::size_t>> stack;
  if (!f.blocks.empty()) {
    stack.push_back({0, 0});
    color[0] = 1;
  }
  while (!stack.empty()) {
    auto& [b, next] = stack.back();
    auto succ = successors(f.blocks[b]);
    if (next < succ.size()) {
      BlockId t = succ[next++];
      if (color[t] == 1) {
        fi->back_edges.insert({b, t});
        fi->headers.insert(t);
      } else if (color[t] == 0) {
        color[t] = 1;
        stack.push_back({t, 0});
      }
    } else {
      color[b] = 2;
      stack.pop_back();
    }
  }
  return *infos_.emplace(&f, std::move(fi)).first->second;
}

void Executor::run_entry(const Function& f) {
  ExecState s;
  s.pc = tt_.true_term();
  call(s, f, {}, f.span);
}

TermId Executor::fresh(const std::string& name, const Sort& sort) { return tt_.fresh_symbol(name, sort); }

void Executor::emit(const ExecState& s, ObligationKind kind, TermId claim, const SourceSpan& where,
                    std::string message, TermId guard) {
  Obligation ob;
  ob.location = where;
  ob.kind = kind;
  ob.claim = claim;
  ob.context = guard.valid() ? tt_.mk_and(s.pc, guard) : s.pc;
  ob.message = std::move(message);
  ob.function = fn_stack_.empty() ? "" : fn_stack_.back();
  obligations_.push_back(std::move(ob));
}

void Executor::assume(const ExecState& s, TermId cond) {
  assumptions_.push_back(tt_.is_true(s.pc) ? cond : tt_.mk_implies(s.pc, cond));
}

bool Executor::feasible(const ExecState& s, TermId cond) {
  if (tt_.is_true(cond)) return !tt_.is_false(s.pc);
  if (tt_.is_false(cond)) return false;
  TermId q = tt_.mk_and(s.pc, cond);
  if (tt_.is_false(q)) return false;
  if (cfg_.feasibility == Feasibility::IntervalOnly) return true;
  std::vector<TermId> parts = assumptions_;
  parts.push_back(q);
  auto r = solver_.check(tt_.mk_and_all(parts));
  return r.status != QueryStatus::Unsat;
}

SymVal Executor::mux(TermId c, const SymVal& a, const SymVal& b, const std::string& where) {
  if (a.is_ref() != b.is_ref()) throw EngineError("merge: reference and value disagree at " + where);
  if (a.is_ref()) return SymVal{TermId{}, mux_refs(tt_, c, *a.ref, *b.ref, cfg_.ref_mux_cap, where)};
  return SymVal{tt_.mk_ite(c, a.term, b.term), std::nullopt};
}

ExecState Executor::merge_states(TermId c, TermId fork_pc, ExecState t, ExecState e, const std::string& where) {
  if (!t.alive) return e;
  if (!e.alive) return t;
  if (t.locals.size() != e.locals.size()) throw EngineError("merge: frame shape mismatch at " + where);
  ExecState m;
  if (t.pc == tt_.mk_and(fork_pc, c) && e.pc == tt_.mk_and(fork_pc, tt_.mk_not(c))) {
    m.pc = fork_pc;
  } else {
    m.pc = tt_.mk_or(t.pc, e.pc);
  }
  m.locals.resize(t.locals.size());
  for (std::size_t i = 0; i < t.locals.size(); ++i) {
    const auto& a = t.locals[i];
    const auto& b = e.locals[i];
    if (a && b) m.locals[i] = mux(c, *a, *b, where);
    else if (a) m.locals[i] = a;
    else m.locals[i] = b;
  }
  m.heap = merge_heaps(tt_, c, t.heap, e.heap);
  m.occurrences = std::move(t.occurrences);
  max_merge(m.occurrences, e.occurrences);
  m.back_edges = std::move(t.back_edges);
  max_merge(m.back_edges, e.back_edges);
  return m;
}

SymVal Executor::call(ExecState& s, const Function& f, const std::vector<SymVal>& args, const SourceSpan& where) {
  if (hook_) {
    if (auto r = hook_->on_call(*this, s, f, args, where)) return *r;
  }
  return exec_function(s, f, args);
}

SymVal Executor::exec_function(ExecState& s, const Function& f, const std::vector<SymVal>& args) {
  unsigned& depth = depth_[f.name];
  if (depth >= cfg_.max_unroll) {
    throw EngineError("unroll bound exceeded: recursion of " + f.name + " deeper than " +
                      std::to_string(cfg_.max_unroll) + " at " + f.span.str());
  }
  ++depth;
  ++body_runs_[f.name];
  fn_stack_.push_back(f.name);
  Frame fr{&f, &info(f), ++activations_, {}};
  auto saved = std::move(s.locals);
  s.locals.assign(f.locals.size(), std::nullopt);
  for (std::size_t i = 0; i < args.size() && i < f.locals.size(); ++i) s.locals[i] = args[i];
  run_region(fr, s, 0, kExitBlock);
  fn_stack_.pop_back();
  --depth_[f.name];

  if (fr.exits.empty()) {
    s.locals = std::move(saved);
    s.alive = false;
    return SymVal{tt_.unit_term(), std::nullopt};
  }
  auto acc = std::move(fr.exits.back());
  for (std::size_t i = fr.exits.size() - 1; i-- > 0;) {
    auto& [st, v] = fr.exits[i];
    TermId c = st.pc;
    acc.second = mux(c, v, acc.second, f.name + " return");
    acc.first.heap = merge_heaps(tt_, c, st.heap, acc.first.heap);
    acc.first.pc = tt_.mk_or(c, acc.first.pc);
    max_merge(acc.first.occurrences, st.occurrences);
    max_merge(acc.first.back_edges, st.back_edges);
  }
  s.heap = std::move(acc.first.heap);
  s.pc = acc.first.pc;
  s.occurrences = std::move(acc.first.occurrences);
  s.back_edges = std::move(acc.first.back_edges);
  s.locals = std::move(saved);
  s.alive = true;
  return acc.second;
}

BlockId Executor::take_edge(Frame& fr, ExecState& s, BlockId from, BlockId to) {
  if (fr.info->back_edges.count({from, to})) {
    unsigned& n = s.back_edges[{fr.activation, from, to}];
    if (++n > cfg_.max_unroll) {
      throw EngineError("unroll bound exceeded: loop at " + location(*fr.fn, fr.fn->blocks[to]) +
                        " still feasible after " + std::to_string(cfg_.max_unroll) + " iterations");
    }
  } else if (fr.info->headers.count(to)) {
    // Fresh entry into a loop: its back-edge counters restart.
    for (const auto& [a, b] : fr.info->back_edges) {
      if (b == to) s.back_edges.erase({fr.activation, a, b});
    }
  }
  return to;
}

void Executor::run_region(Frame& fr, ExecState& s, BlockId b, BlockId stop) {
  const Function& f = *fr.fn;
  while (b != stop && s.alive) {
    const Block& blk = f.blocks.at(b);
    for (std::size_t i = 0; i < blk.statements.size() && s.alive; ++i) exec_statement(fr, s, blk.statements[i], b, i);
    if (!s.alive) return;
    const Terminator& t = blk.terminator;
    switch (t.kind) {
      case Terminator::Kind::Goto: b = take_edge(fr, s, b, t.targets[0]); break;
      case Terminator::Kind::Branch: {
        TermId c = term_of(s, t.value);
        if (!feasible(s, c)) {
          b = take_edge(fr, s, b, t.targets[1]);
          break;
        }
        TermId nc = tt_.mk_not(c);
        if (!feasible(s, nc)) {
          b = take_edge(fr, s, b, t.targets[0]);
          break;
        }
        BlockId join = fr.info->pd.ipdom.at(b);
        TermId fork_pc = s.pc;
        ExecState st = s;
        st.pc = tt_.mk_and(fork_pc, c);
        ExecState se = std::move(s);
        se.pc = tt_.mk_and(fork_pc, nc);
        run_region(fr, st, take_edge(fr, st, b, t.targets[0]), join);
        run_region(fr, se, take_edge(fr, se, b, t.targets[1]), join);
        s = merge_states(c, fork_pc, std::move(st), std::move(se), location(f, blk));
        if (join == kExitBlock) s.alive = false;
        b = join;
        break;
      }
      case Terminator::Kind::Return: {
        SymVal v = operand(s, t.value);
        fr.exits.emplace_back(s, std::move(v));
        fr.exits.back().first.locals.clear();
        s.alive = false;
        return;
      }
      case Terminator::Kind::Panic:
        emit(s, ObligationKind::Panic, tt_.false_term(), t.span, t.text.empty() ? "panic" : t.text);
        s.alive = false;
        return;
      case Terminator::Kind::Unreachable:
        emit(s, ObligationKind::Unreachable, tt_.false_term(), t.span, "unreachable reached");
        s.alive = false;
        return;
    }
  }
}

SymVal Executor::operand(const ExecState& s, const Operand& o) {
  if (o.kind == Operand::Kind::Const) return SymVal{tt_.constant(o.value), std::nullopt};
  const auto& v = s.locals.at(o.local);
  if (!v) throw EngineError("read of unassigned local at " + o.span.str());
  return *v;
}

TermId Executor::term_of(const ExecState& s, const Operand& o) {
  SymVal v = operand(s, o);
  if (v.is_ref()) throw EngineError("reference used as a value at " + o.span.str());
  return v.term;
}

const GuardedRef& Executor::ref_of(const ExecState& s, const Operand& o) {
  if (o.kind == Operand::Kind::Local) {
    const auto& v = s.locals.at(o.local);
    if (v && v->is_ref()) return *v->ref;
  }
  throw EngineError("expected a reference at " + o.span.str());
}

void Executor::emit_checks(const ExecState& s, const std::vector<MemCheck>& checks, const SourceSpan& where) {
  for (const auto& c : checks) emit(s, ObligationKind::Bounds, c.claim, where, "index out of bounds", c.guard);
}

void Executor::exec_statement(Frame& fr, ExecState& s, const Statement& st, BlockId b, std::size_t idx) {
  const Function& f = *fr.fn;
  auto next_key = [&] {
    const std::string& label = f.blocks[b].label;
    std::string loc = f.name + ":" + label + ":" + std::to_string(idx);
    key_ = occurrence_key(f.name, label, idx, s.occurrences[loc]++);
  };
  switch (st.kind) {
    case Statement::Kind::Nop: return;
    case Statement::Kind::Assign: {
      if (st.rvalue.kind == Rvalue::Kind::Call) next_key();
      SymVal v = eval_rvalue(s, st.rvalue, f.locals[st.dest].sort);
      if (s.alive) s.locals[st.dest] = std::move(v);
      return;
    }
    case Statement::Kind::Store: {
      const GuardedRef& r = ref_of(s, st.a);
      TermId v = term_of(s, st.b);
      std::vector<MemCheck> checks;
      GuardedRef copy = r;
      s.heap.write(tt_, copy, v, checks);
      emit_checks(s, checks, st.span);
      return;
    }
    case Statement::Kind::Symbolic: {
      next_key();
      TermId t = fresh(st.text, st.sort);
      records_.push_back({key_, st.text, st.sort, t});
      s.locals[st.dest] = SymVal{t, std::nullopt};
      return;
    }
    case Statement::Kind::Assume: assume(s, term_of(s, st.a)); return;
    case Statement::Kind::Assert:
      emit(s, ObligationKind::Assert, term_of(s, st.a), st.span, st.has_message ? st.text : "assertion failed");
      return;
    case Statement::Kind::EnableSpec:
    {
      const Function* spec = prog_.find_function(st.text);
      if (!spec || !spec->spec_for) throw EngineError("enable_spec " + st.text + ": not a spec at " + st.span.str());
      if (!hook_) throw EngineError("enable_spec " + st.text + ": no verified summary at " + st.span.str());
      hook_->on_enable(*this, st.text, st.span);
      enabled_.insert(*spec->spec_for);
      return;
    }
  }
}

TermId Executor::override_call(const std::string& name, const std::vector<SymVal>& args) {
  std::vector<TermId> a;
  for (const auto& v : args) {
    if (v.is_ref()) throw EngineError("override " + name + " takes no references");
    a.push_back(v.term);
  }
  if (name == "rotl" || name == "rotr") {
    unsigned w = tt_.sort(a[0]).width();
    TermId r = (w & (w - 1)) == 0 ? tt_.mk(Op::BvAnd, {a[1], tt_.bv_const(w - 1, w)})
                                  : tt_.mk(Op::BvURem, {a[1], tt_.bv_const(w, w)});
    TermId back = tt_.mk(Op::BvSub, {tt_.bv_const(w, w), r});
    Op fwd = name == "rotl" ? Op::BvShl : Op::BvLShr;
    Op rev = name == "rotl" ? Op::BvLShr : Op::BvShl;
    return tt_.mk(Op::BvOr, {tt_.mk(fwd, {a[0], r}), tt_.mk(rev, {a[0], back})});
  }
  if (name == "umax") return tt_.mk_ite(tt_.mk(Op::BvUGe, {a[0], a[1]}), a[0], a[1]);
  if (name == "umin") return tt_.mk_ite(tt_.mk(Op::BvULe, {a[0], a[1]}), a[0], a[1]);
  if (name == "sort") {
    auto e = tt_.explode(a[0]);
    for (std::size_t i = 1; i < e.size(); ++i) {
      for (std::size_t j = i; j > 0; --j) {
        TermId le = tt_.mk(Op::BvULe, {e[j - 1], e[j]});
        TermId lo = tt_.mk_ite(le, e[j - 1], e[j]);
        TermId hi = tt_.mk_ite(le, e[j], e[j - 1]);
        e[j - 1] = lo;
        e[j] = hi;
      }
    }
    return tt_.rebuild(tt_.sort(a[0]), std::move(e));
  }
  throw EngineError("unsupported construct: call to unknown function " + name);
}

SymVal Executor::eval_rvalue(ExecState& s, const Rvalue& rv, const Sort& dest) {
  auto t = [&](std::size_t i) { return term_of(s, rv.args.at(i)); };
  auto val = [](TermId x) { return SymVal{x, std::nullopt}; };
  switch (rv.kind) {
    case Rvalue::Kind::Use: return operand(s, rv.args.at(0));
    case Rvalue::Kind::Prim:
    case Rvalue::Kind::Checked: {
      std::vector<TermId> as;
      for (std::size_t i = 0; i < rv.args.size(); ++i) as.push_back(t(i));
      if (rv.op == Op::BvUDiv || rv.op == Op::BvURem) {
        unsigned w = tt_.sort(as[1]).width();
        emit(s, ObligationKind::DivByZero, tt_.mk_not(tt_.mk_eq(as[1], tt_.bv_const(0, w))), rv.span,
             "division by zero");
      } else if (rv.kind == Rvalue::Kind::Checked) {
        unsigned w = tt_.sort(as[0]).width();
        TermId claim;
        switch (rv.op) {
          case Op::BvAdd: claim = tt_.mk(Op::BvULe, {as[0], tt_.mk(Op::BvNot, {as[1]})}); break;
          case Op::BvSub: claim = tt_.mk(Op::BvULe, {as[1], as[0]}); break;
          case Op::BvMul: {
            if (2 * w > kMaxBitWidth) throw EngineError("unsupported construct: checked mul wider than 64 bits");
            TermId wide = tt_.mk(Op::BvMul, {tt_.mk_zext(as[0], 2 * w), tt_.mk_zext(as[1], 2 * w)});
            claim = tt_.mk(Op::BvULe, {wide, tt_.bv_const(width_mask(w), 2 * w)});
            break;
          }
          default: throw EngineError("unsupported checked operation at " + rv.span.str());
        }
        emit(s, ObligationKind::Overflow, claim, rv.span,
             std::string("arithmetic overflow in ") + std::string(prim_keyword(rv.op)));
      }
      return val(tt_.mk(rv.op, std::move(as), rv.param));
    }
    case Rvalue::Kind::Tuple: {
      std::vector<TermId> ms;
      for (std::size_t i = 0; i < rv.args.size(); ++i) ms.push_back(t(i));
      return val(tt_.mk_tuple(std::move(ms)));
    }
    case Rvalue::Kind::Array: {
      std::vector<TermId> ms;
      for (std::size_t i = 0; i < rv.args.size(); ++i) ms.push_back(t(i));
      return val(tt_.mk_array(dest.elem(), std::move(ms)));
    }
    case Rvalue::Kind::Record: {
      std::vector<TermId> ms;
      for (std::size_t i = 0; i < rv.args.size(); ++i) ms.push_back(t(i));
      return val(tt_.mk_record(dest, std::move(ms)));
    }
    case Rvalue::Kind::Variant: return val(tt_.mk_variant(dest, rv.index, t(0)));
    case Rvalue::Kind::Field: return val(tt_.member(t(0), rv.index));
    case Rvalue::Kind::Payload: return val(tt_.mk(Op::VariantGet, {t(0)}, rv.index));
    case Rvalue::Kind::Tag: return val(tt_.mk(Op::VariantTag, {t(0)}));
    case Rvalue::Kind::IsArm:
      return val(tt_.mk_eq(tt_.mk(Op::VariantTag, {t(0)}), tt_.bv_const(rv.index, kVariantTagWidth)));
    case Rvalue::Kind::Index: {
      TermId a = t(0), i = t(1);
      emit(s, ObligationKind::Bounds, bounds_claim(tt_, i, tt_.sort(a).length()), rv.span, "index out of bounds");
      return val(select_element(tt_, a, i));
    }
    case Rvalue::Kind::Update: {
      TermId a = t(0), i = t(1), v = t(2);
      Sort as = tt_.sort(a);
      emit(s, ObligationKind::Bounds, bounds_claim(tt_, i, as.length()), rv.span, "index out of bounds");
      auto elems = tt_.explode(a);
      if (auto c = tt_.const_bits(i)) {
        if (*c < elems.size()) elems[static_cast<std::size_t>(*c)] = v;
      } else {
        unsigned w = tt_.sort(i).width();
        for (std::size_t k = 0; k < elems.size(); ++k) {
          if (w < 64 && k > width_mask(w)) break;
          elems[k] = tt_.mk_ite(tt_.mk_eq(i, tt_.bv_const(k, w)), v, elems[k]);
        }
      }
      return val(tt_.rebuild(as, std::move(elems)));
    }
    case Rvalue::Kind::Alloc: {
      TermId init = t(0);
      return SymVal{TermId{}, s.heap.alloc(tt_, next_alloc_++, tt_.sort(init), init)};
    }
    case Rvalue::Kind::Load: {
      std::vector<MemCheck> checks;
      TermId v = s.heap.read(tt_, ref_of(s, rv.args.at(0)), checks);
      emit_checks(s, checks, rv.span);
      return val(v);
    }
    case Rvalue::Kind::RefField:
    case Rvalue::Kind::RefIndex:
    case Rvalue::Kind::RefPayload: {
      PathStep step;
      step.index = rv.index;
      if (rv.kind == Rvalue::Kind::RefIndex) {
        step.kind = PathStep::Kind::Index;
        step.index = 0;
        step.term = t(1);
      } else if (rv.kind == Rvalue::Kind::RefPayload) {
        step.kind = PathStep::Kind::Arm;
      }
      return SymVal{TermId{}, project(tt_, ref_of(s, rv.args.at(0)), step)};
    }
    case Rvalue::Kind::Call: {
      std::vector<SymVal> args;
      for (const auto& o : rv.args) args.push_back(operand(s, o));
      const Function* callee = prog_.find_function(rv.name);
      if (!callee) return val(override_call(rv.name, args));
      return call(s, *callee, args, rv.span);
    }
  }
  throw EngineError("unsupported construct at " + rv.span.str());
}

// ---------------------------------------------------------------------------

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Proven: return "Proven";
    case Verdict::Refuted: return "Refuted";
    case Verdict::Vacuous: return "Vacuous";
    case Verdict::EngineError: return "EngineError";
    case Verdict::Skipped: return "Skipped";
  }
  return "?";
}

InterpHooks model_inputs(const TermTable& tt, const std::vector<SymbolRecord>& records, const Model& model) {
  InterpHooks h;
  auto by_key = std::make_shared<std::map<std::string, TermId>>();
  for (const auto& r : records) (*by_key)[r.key] = r.term;
  auto env = std::make_shared<Env>(model.env());
  h.symbolic = [&tt, by_key, env](const std::string& key, const std::string& name, const Sort&) {
    auto it = by_key->find(key);
    if (it == by_key->end()) throw EngineError("replay: model has no value for symbolic " + name + " (" + key + ")");
    for (auto sym : tt.symbols_in(it->second)) {
      if (!env->count(tt.node(sym).ordinal)) throw EngineError("replay: model is missing symbol " + tt.node(sym).name);
    }
    return tt.eval(it->second, *env);
  };
  return h;
}

ReplayOutcome concrete_replay(const Program& p, const Function& test, const InterpHooks& hooks,
                              const Obligation& target, bool trace) {
  InterpOptions opts;
  opts.trace = trace;
  Interpreter in(p, hooks, opts);
  InterpResult r = in.run(test);
  ReplayOutcome out;
  out.failures = r.failures;
  out.trace = std::move(r.trace);
  out.model_inconsistent = r.status == InterpResult::Status::AssumptionFailed;
  if (r.status == InterpResult::Status::Error) out.error = r.error;
  for (const auto& f : r.failures) {
    if (f.kind == target.kind && f.location.file == target.location.file && f.location.line == target.location.line &&
        f.location.col == target.location.col) {
      out.confirmed = true;
    }
  }
  return out;
}

TestOutcome run_test(const Program& p, const Function& test, CallHook* hook, const ExecConfig& cfg,
                     const ReplayHookFactory& replay_hooks) {
  TestOutcome out;
  out.name = test.name;
  TermTable tt;
  std::optional<Executor> ex;
  try {
    ex.emplace(p, tt, cfg, hook);
    ex->run_entry(test);
    const auto& obs = ex->obligations();
    for (std::size_t i = 0; i < obs.size(); ++i) {
      CheckResult r = check_obligation(tt, ex->solver(), ex->assumptions(), obs[i]);
      out.obligations.push_back({obs[i], r.valid, r.fast_path});
      if (!r.valid && !out.failing) {
        out.failing = i;
        out.model = complete_model(tt, r.model.env());
      }
    }
    if (out.failing) {
      out.verdict = Verdict::Refuted;
      InterpHooks hooks = replay_hooks ? replay_hooks(out.model, *ex) : model_inputs(tt, ex->symbol_records(), out.model);
      out.replay = concrete_replay(p, test, hooks, obs[*out.failing], cfg.trace);
    } else {
      out.verdict = Verdict::Proven;
      TermId a = tt.mk_and_all(ex->assumptions());
      if (!tt.is_true(a)) {
        auto r = ex->solver().check(a);
        if (r.status == QueryStatus::Unknown) throw EngineError("vacuity check: solver returned unknown: " + r.reason);
        if (r.status == QueryStatus::Unsat) out.verdict = Verdict::Vacuous;
      }
    }
  } catch (const Error& e) {
    out.verdict = Verdict::EngineError;
    out.reason = e.what();
    out.failing.reset();
    out.replay.reset();
  }
  out.stats.terms = tt.size();
  if (ex) {
    out.stats.obligations = ex->obligations().size();
    out.stats.assumptions = ex->assumptions().size();
    out.stats.body_runs = ex->body_runs();
    out.stats.solver = ex->solver().stats();
  }
  return out;
}

}  // namespace cruxlite
