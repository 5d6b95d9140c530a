#include "cruxlite/compose.hpp"

#include <algorithm>
#include <functional>

#include "cruxlite/error.hpp"

namespace cruxlite {

namespace {

using SymMap = std::unordered_map<TermId, TermId, TermIdHash>;

// Bind the symbol leaves of `pat` (a constructor tree over symbols, the shape
// fresh_symbol builds) to the matching parts of `val` in `dst`. Leaves bound
// twice and ground leaves become equalities in `eqs`. False when `pat` has
// another shape.
bool bind_leaves(const TermTable& src, TermId pat, TermTable& dst, TermId val, SymMap& map, std::vector<TermId>& eqs) {
  Op op = src.op(pat);
  if (src.node(pat).ground) {
    TermId c = &src == &dst ? pat : dst.import(src, pat, {});
    eqs.push_back(dst.mk_eq(c, val));
    return true;
  }
  switch (op) {
    case Op::Symbol: {
      auto it = map.find(pat);
      if (it != map.end()) eqs.push_back(dst.mk_eq(it->second, val));
      else map.emplace(pat, val);
      return true;
    }
    case Op::MkArray:
    case Op::MkTuple:
    case Op::MkRecord: {
      std::vector<TermId> kids = src.node(pat).children;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (!bind_leaves(src, kids[i], dst, dst.member(val, i), map, eqs)) return false;
      }
      return true;
    }
    case Op::MkVariant: {
      std::size_t arm = static_cast<std::size_t>(src.node(pat).param);
      TermId payload = src.node(pat).children[0];
      return bind_leaves(src, payload, dst, dst.mk(Op::VariantGet, {val}, arm), map, eqs);
    }
    case Op::Ite: {
      // ite(eq(tag, k), mk_variant(k, p), rest)
      std::vector<TermId> kids = src.node(pat).children;
      if (src.op(kids[0]) != Op::Eq || src.op(kids[1]) != Op::MkVariant) return false;
      TermId tag = src.node(kids[0]).children[0];
      if (src.op(tag) != Op::Symbol) return false;
      if (!bind_leaves(src, tag, dst, dst.mk(Op::VariantTag, {val}), map, eqs)) return false;
      return bind_leaves(src, kids[1], dst, val, map, eqs) && bind_leaves(src, kids[2], dst, val, map, eqs);
    }
    default: return false;
  }
}

void bind_value(const TermTable& src, TermId pat, const Value& v, Env& env) {
  const TermNode& n = src.node(pat);
  switch (n.op) {
    case Op::Symbol: env[n.ordinal] = v; return;
    case Op::MkArray:
    case Op::MkTuple:
    case Op::MkRecord:
      for (std::size_t i = 0; i < n.children.size(); ++i) bind_value(src, n.children[i], v.members().at(i), env);
      return;
    case Op::MkVariant: {
      std::size_t arm = static_cast<std::size_t>(n.param);
      bind_value(src, n.children[0], v.arm() == arm ? v.payload() : Value::zero(n.sort.members()[arm]), env);
      return;
    }
    case Op::Ite: {
      TermId tag = src.node(n.children[0]).children[0];
      env[src.node(tag).ordinal] = Value::bitvec(v.arm(), kVariantTagWidth);
      bind_value(src, n.children[1], v, env);
      bind_value(src, n.children[2], v, env);
      return;
    }
    default: return;
  }
}

std::vector<std::string> symbol_names(const TermTable& tt, TermId t, const std::set<TermId>& allowed) {
  std::vector<std::string> out;
  for (auto s : tt.symbols_in(t)) {
    if (!allowed.count(s)) out.push_back(tt.node(s).name);
  }
  return out;
}

std::string joined(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

struct CallRecord {
  std::string name;
  std::vector<TermId> args;
  TermId result;
  bool unconditional = false;
};

class ExtractHook : public SummaryHook {
 public:
  ExtractHook(const SummaryMap& m, const Function& spec, const Function& target)
      : SummaryHook(m), spec_(spec), target_(target) {}

  std::optional<SymVal> on_call(Executor& ex, ExecState& s, const Function& callee, const std::vector<SymVal>& args,
                                const SourceSpan& where) override {
    if (callee.name == target_.name) {
      if (++calls_ > 1) {
        throw ExtractionError("spec " + spec_.name + " calls " + target_.name +
                              " more than once; a spec must contain only one call to the function under test (" +
                              where.str() + ")");
      }
      for (const auto& a : args) {
        if (a.is_ref()) throw ExtractionError("spec " + spec_.name + ": summaries cannot take reference arguments");
        args_.push_back(a.term);
      }
      guard_ = s.pc;
      assumptions_before_ = ex.assumptions().size();
      obligations_before_ = ex.obligations().size();
      result_ = ex.fresh(target_.name + "!result", target_.ret_sort);
      return SymVal{result_, std::nullopt};
    }
    if (auto r = SummaryHook::on_call(ex, s, callee, args, where)) return r;
    SymVal r = ex.exec_function(s, callee, args);
    if (calls_ == 1 && s.alive && !r.is_ref()) {
      CallRecord rec{callee.name, {}, r.term, ex.tt().is_true(s.pc)};
      bool plain = true;
      for (const auto& a : args) {
        if (a.is_ref()) plain = false;
        else rec.args.push_back(a.term);
      }
      if (plain) records_.push_back(std::move(rec));
    }
    return r;
  }

  const Function& spec_;
  const Function& target_;
  unsigned calls_ = 0;
  std::vector<TermId> args_;
  TermId guard_;
  TermId result_;
  std::size_t assumptions_before_ = 0;
  std::size_t obligations_before_ = 0;
  std::vector<CallRecord> records_;
};

}  // namespace

std::optional<SymVal> SummaryHook::on_call(Executor& ex, ExecState& s, const Function& callee,
                                           const std::vector<SymVal>& args, const SourceSpan& where) {
  if (!ex.enabled_specs().count(callee.name)) return std::nullopt;
  auto it = active_.find(callee.name);
  if (it == active_.end()) return std::nullopt;
  return apply_summary(ex, s, *it->second, args, where);
}

void SummaryHook::on_enable(Executor&, const std::string& spec, const SourceSpan& where) {
  auto it = summaries_.find(spec);
  if (it == summaries_.end() || !it->second) {
    throw EngineError("enable_spec " + spec + ": no verified summary at " + where.str());
  }
  active_[it->second->target] = it->second.get();
}

SymVal apply_summary(Executor& ex, ExecState& s, const SpecSummary& sum, const std::vector<SymVal>& args,
                     const SourceSpan& where) {
  TermTable& tt = ex.tt();
  const TermTable& src = *sum.table;
  if (args.size() != sum.formals.size()) throw EngineError("summary of " + sum.target + ": argument count mismatch");
  SymMap map;
  std::vector<TermId> eqs;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i].is_ref()) throw EngineError("summary of " + sum.target + ": reference arguments are not supported");
    if (!bind_leaves(src, sum.formals[i], tt, args[i].term, map, eqs)) {
      throw EngineError("summary of " + sum.target + ": malformed formal input");
    }
  }
  TermId pre = tt.import(src, sum.precondition, map);
  ex.emit(s, ObligationKind::SpecPrecondition, pre, where, "precondition of " + sum.target + " from " + sum.spec);
  if (sum.mode == SummaryMode::Substitution) {
    const Function* g = ex.program().find_function(sum.reference);
    if (!g) throw EngineError("summary of " + sum.target + ": reference " + sum.reference + " not found");
    return ex.call(s, *g, args, where);
  }
  std::string key = ex.current_key();
  const Sort& rs = src.sort(sum.result);
  TermId r = ex.fresh(sum.target + "!ret", rs);
  ex.add_record({key, sum.target + "!ret", rs, r});
  if (!bind_leaves(src, sum.result, tt, r, map, eqs)) throw EngineError("summary of " + sum.target + ": malformed result");
  ex.assume(s, tt.import(src, sum.post, map));
  return SymVal{r, std::nullopt};
}

ReplayHookFactory summary_replay(const SummaryMap& summaries) {
  return [&summaries](const Model& model, const Executor& ex) {
    const TermTable& tt = const_cast<Executor&>(ex).tt();
    InterpHooks h = model_inputs(tt, ex.symbol_records(), model);
    auto by_key = std::make_shared<std::map<std::string, TermId>>();
    for (const auto& r : ex.symbol_records()) (*by_key)[r.key] = r.term;
    auto env = std::make_shared<Env>(model.env());
    h.call = [&summaries, &tt, by_key, env](Interpreter& in, const Function& callee, const std::vector<Value>& args,
                                           const std::string& key, const SourceSpan& where) -> std::optional<Value> {
      auto it = summaries.find(in.enabled_spec(callee.name));
      if (it == summaries.end()) return std::nullopt;
      const SpecSummary& sum = *it->second;
      const TermTable& st = *sum.table;
      Env e;
      for (std::size_t i = 0; i < args.size(); ++i) bind_value(st, sum.formals[i], args[i], e);
      if (!st.eval(sum.precondition, e).as_bool()) {
        in.fail(ObligationKind::SpecPrecondition, where, "precondition of " + sum.target + " from " + sum.spec);
      }
      if (sum.mode == SummaryMode::Substitution) {
        return in.call(*in.program().find_function(sum.reference), args);
      }
      auto k = by_key->find(key);
      if (k == by_key->end()) throw EngineError("replay: no summarized result for call " + key);
      Value rv = tt.eval(k->second, *env);
      bind_value(st, sum.result, rv, e);
      if (!st.eval(sum.post, e).as_bool()) in.assumption_failed();
      return rv;
    };
    return h;
  };
}

TestOutcome run_with_summaries(const Program& p, const Function& test, const SummaryMap& summaries,
                               const ExecConfig& cfg) {
  SummaryHook hook(summaries);
  return run_test(p, test, &hook, cfg, summary_replay(summaries));
}

std::vector<std::string> enabled_spec_names(const Program& p, const Function& f) {
  std::vector<std::string> out;
  std::set<std::string> seen_fn;
  std::function<void(const Function&)> walk = [&](const Function& g) {
    if (!seen_fn.insert(g.name).second) return;
    for (const auto& b : g.blocks) {
      for (const auto& st : b.statements) {
        if (st.kind == Statement::Kind::EnableSpec) {
          if (std::find(out.begin(), out.end(), st.text) == out.end()) out.push_back(st.text);
        } else if (st.kind == Statement::Kind::Assign && st.rvalue.kind == Rvalue::Kind::Call) {
          if (const Function* c = p.find_function(st.rvalue.name)) walk(*c);
        }
      }
    }
  };
  walk(f);
  return out;
}

std::vector<std::string> find_spec_cycle(const Program& p) {
  std::map<std::string, int> color;
  std::vector<std::string> stack;
  std::vector<std::string> cycle;
  std::function<bool(const std::string&)> dfs = [&](const std::string& name) {
    color[name] = 1;
    stack.push_back(name);
    const Function* f = p.find_function(name);
    if (f) {
      for (const auto& dep : enabled_spec_names(p, *f)) {
        if (color[dep] == 1) {
          auto it = std::find(stack.begin(), stack.end(), dep);
          cycle.assign(it, stack.end());
          cycle.push_back(dep);
          return true;
        }
        if (color[dep] == 0 && dfs(dep)) return true;
      }
    }
    stack.pop_back();
    color[name] = 2;
    return false;
  };
  for (const auto& f : p.functions) {
    if (f.spec_for && color[f.name] == 0 && dfs(f.name)) return cycle;
  }
  return {};
}

TestOutcome verify_spec(const Program& p, const Function& spec, const SummaryMap& summaries, const ExecConfig& cfg) {
  auto cyc = find_spec_cycle(p);
  if (std::find(cyc.begin(), cyc.end(), spec.name) != cyc.end()) {
    std::string path;
    for (const auto& n : cyc) path += (path.empty() ? "" : " -> ") + n;
    TestOutcome out;
    out.name = spec.name;
    out.verdict = Verdict::EngineError;
    out.reason = "cyclic spec enablement: " + path;
    return out;
  }
  return run_with_summaries(p, spec, summaries, cfg);
}

SpecSummary extract_summary(const Program& p, const Function& spec, const SummaryMap& summaries,
                            const ExecConfig& cfg, const TestOutcome& verified) {
  if (verified.verdict != Verdict::Proven) {
    throw ExtractionError("spec " + spec.name + " is " + std::string(verdict_name(verified.verdict)) +
                          "; only a Proven spec yields a summary");
  }
  if (!spec.spec_for) throw ExtractionError(spec.name + " is not a spec");
  const Function* target = p.find_function(*spec.spec_for);
  if (!target) throw ExtractionError("spec " + spec.name + ": target " + *spec.spec_for + " not found");

  SpecSummary sum;
  sum.target = target->name;
  sum.spec = spec.name;
  sum.table = std::make_shared<TermTable>();
  TermTable& tt = *sum.table;
  ExtractHook hook(summaries, spec, *target);
  Executor ex(p, tt, cfg, &hook);
  ex.run_entry(spec);

  if (hook.calls_ == 0) {
    throw ExtractionError("spec " + spec.name + " never calls " + target->name +
                          "; a spec must contain only one call to the function under test");
  }
  if (ex.assumptions().size() > hook.assumptions_before_) {
    throw ExtractionError("spec " + spec.name + ": assumption after the call to " + target->name +
                          "; only assumptions before the call become preconditions");
  }
  sum.call_under_branch = !tt.is_true(hook.guard_);
  sum.result = hook.result_;

  SymMap map;
  std::vector<TermId> eqs;
  for (std::size_t i = 0; i < target->num_params; ++i) {
    const Local& prm = target->locals[i];
    if (prm.sort.contains_reference()) {
      throw ExtractionError("spec " + spec.name + ": summaries cannot take reference parameters (" + prm.name + ")");
    }
    sum.formals.push_back(tt.fresh_symbol(prm.name, prm.sort));
  }
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < hook.args_.size(); ++i) {
    SymMap trial = map;
    std::vector<TermId> teqs = eqs;
    if (bind_leaves(tt, hook.args_[i], tt, sum.formals[i], trial, teqs)) {
      map = std::move(trial);
      eqs = std::move(teqs);
    } else {
      pending.push_back(i);
    }
  }

  // Equalities among the preconditions determine further symbols.
  std::vector<TermId> pre_parts(ex.assumptions().begin(), ex.assumptions().begin() + hook.assumptions_before_);
  std::vector<TermId> pre_conj;
  for (auto a : pre_parts) {
    for (auto c : tt.conjuncts(a)) pre_conj.push_back(c);
  }
  auto mapped = [&](TermId t) {
    for (auto s : tt.symbols_in(t)) {
      if (!map.count(s)) return false;
    }
    return true;
  };
  for (bool progress = true; progress;) {
    progress = false;
    for (auto c : pre_conj) {
      if (tt.op(c) != Op::Eq) continue;
      TermId l = tt.node(c).children[0], r = tt.node(c).children[1];
      for (int side = 0; side < 2; ++side, std::swap(l, r)) {
        if (mapped(l) && !mapped(r)) {
          SymMap trial = map;
          std::vector<TermId> teqs;
          if (bind_leaves(tt, r, tt, tt.substitute(l, map), trial, teqs)) {
            map = std::move(trial);
            for (auto e : teqs) eqs.push_back(e);
            progress = true;
            break;
          }
        }
      }
    }
  }
  for (auto i : pending) {
    if (!mapped(hook.args_[i])) {
      throw ExtractionError("spec " + spec.name + ": argument " + std::to_string(i + 1) + " of the call to " +
                            target->name + " is not expressible over the formal inputs");
    }
    eqs.push_back(tt.mk_eq(sum.formals[i], tt.substitute(hook.args_[i], map)));
  }

  std::vector<TermId> pre = eqs;
  for (auto a : pre_parts) pre.push_back(tt.substitute(a, map));
  sum.precondition = tt.mk_and_all(pre);

  std::vector<TermId> post;
  const auto& obs = ex.obligations();
  for (std::size_t i = hook.obligations_before_; i < obs.size(); ++i) {
    if (obs[i].kind != ObligationKind::Assert) continue;
    TermId c = tt.is_true(obs[i].context) ? obs[i].claim : tt.mk_implies(obs[i].context, obs[i].claim);
    post.push_back(tt.substitute(c, map));
  }
  sum.post = tt.mk_and_all(post);
  auto result_syms = tt.symbols_in(sum.result);
  auto post_syms = tt.symbols_in(sum.post);
  bool mentions = result_syms.empty();
  for (auto r : result_syms) mentions |= std::find(post_syms.begin(), post_syms.end(), r) != post_syms.end();
  if (!mentions) throw ExtractionError("spec " + spec.name + ": no assertion after the call constrains the result");

  std::set<TermId> allowed;
  for (auto f : sum.formals) {
    for (auto s : tt.symbols_in(f)) allowed.insert(s);
  }
  if (auto bad = symbol_names(tt, sum.precondition, allowed); !bad.empty()) {
    throw ExtractionError("spec " + spec.name + ": precondition mentions " + joined(bad) +
                          ", which the arguments of the call to " + target->name + " do not determine");
  }
  for (auto s : result_syms) allowed.insert(s);
  if (auto bad = symbol_names(tt, sum.post, allowed); !bad.empty()) {
    throw ExtractionError("spec " + spec.name + ": postcondition mentions " + joined(bad) +
                          ", which the arguments of the call to " + target->name + " do not determine");
  }

  // Substitution: the postcondition is exactly result = g(formals).
  if (tt.op(sum.post) == Op::Eq) {
    TermId l = tt.node(sum.post).children[0], r = tt.node(sum.post).children[1];
    TermId other = l == sum.result ? r : r == sum.result ? l : TermId{};
    if (other.valid()) {
      for (const auto& rec : hook.records_) {
        const Function* g = p.find_function(rec.name);
        if (!rec.unconditional || !g || g->name == target->name || g->num_params != target->num_params) continue;
        if (tt.substitute(rec.result, map) != other) continue;
        bool same = true;
        for (std::size_t i = 0; i < rec.args.size() && same; ++i) {
          same = tt.substitute(rec.args[i], map) == sum.formals[i] && g->locals[i].sort == target->locals[i].sort;
        }
        if (same && g->ret_sort == target->ret_sort) {
          sum.mode = SummaryMode::Substitution;
          sum.reference = g->name;
          break;
        }
      }
    }
  }
  return sum;
}

nlohmann::ordered_json summary_json(const SpecSummary& s) {
  nlohmann::ordered_json j;
  j["target"] = s.target;
  j["mode"] = s.mode == SummaryMode::Substitution ? "Substitution" : "General";
  if (s.mode == SummaryMode::Substitution) j["reference"] = s.reference;
  j["precondition"] = s.table->render(s.precondition);
  j["post_relation"] = s.table->render(s.post);
  j["provenance"] = {{"spec", s.spec}, {"verdict", std::string(verdict_name(s.verdict))}};
  j["call_under_branch"] = s.call_under_branch;
  return j;
}

}  // namespace cruxlite
