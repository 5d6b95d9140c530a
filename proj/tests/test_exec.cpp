#include <gtest/gtest.h>

#include <random>

#include "cruxlite/error.hpp"
#include "cruxlite/exec.hpp"
#include "cruxlite/frontend.hpp"

using namespace cruxlite;

namespace {

Program must_parse(const std::string& text) {
  auto r = parse(text, "t.cir");
  if (!r.ok()) {
    ADD_FAILURE() << r.diagnostics.at(0).str();
    return {};
  }
  auto d = sort_check(*r.program);
  if (!d.empty()) ADD_FAILURE() << d[0].str();
  return *r.program;
}

struct Harness {
  Program p;
  TermTable tt;
  ExecConfig cfg;
  std::unique_ptr<Executor> ex;
  ExecState s;

  explicit Harness(const std::string& text, ExecConfig c = {}) : p(must_parse(text)), cfg(c) {
    ex = std::make_unique<Executor>(p, tt, cfg);
    s.pc = tt.true_term();
  }
  SymVal call(const std::string& fn, const std::vector<TermId>& args) {
    std::vector<SymVal> a;
    for (auto t : args) a.push_back({t, std::nullopt});
    return ex->exec_function(s, *p.find_function(fn), a);
  }
};

TestOutcome run(const std::string& text, const std::string& test, ExecConfig cfg = {}) {
  Program p = must_parse(text);
  return run_test(p, *p.find_function(test), nullptr, cfg);
}

Env env2(const TermTable& tt, TermId a, u128 av, TermId b, u128 bv) {
  Env e;
  e[tt.node(a).ordinal] = Value::bitvec(av, tt.sort(a).width());
  e[tt.node(b).ordinal] = Value::bitvec(bv, tt.sort(b).width());
  return e;
}

const char* kMergeClocks = R"(
fn merge_clocks(a: bv32, b: bv32) -> bv32 {
  let c: bool
entry:
  c = ugt a, b
  br c take_a take_b
take_a:
  ret a
take_b:
  ret b
}
)";

std::string merge_vc(unsigned width, unsigned n, bool buggy) {
  std::string w = "bv" + std::to_string(width);
  std::string arr = "[" + w + "; " + std::to_string(n) + "]";
  std::string iw = "bv8";
  std::string text = "fn merge_clocks(a: " + w + ", b: " + w + ") -> " + w + R"( {
  let c: bool
entry:
  c = ugt a, b
  br c take_a take_b
take_a:
  ret a
take_b:
  ret b
}
fn merge_vc(a: )" + arr + ", b: " + arr + ") -> " + arr + R"( {
  let out: )" + arr + R"(
  let i: bv8
  let c: bool
  let x: )" + w + R"(
  let y: )" + w + R"(
  let m: )" + w + R"(
entry:
  out = mkarray [0:)" + w + "; " + std::to_string(n) + R"(]
  i = 0:bv8
  goto header
header:
  c = ult i, )" + std::to_string(n) + R"(:bv8
  br c body done
body:
  x = index a[i]
  y = index b[i]
)" + (buggy ? "  m = x\n" : "  m = call merge_clocks(x, y)\n") +
                     R"(  out = update out[i], m
  i = add i, 1:bv8
  goto header
done:
  ret out
}
#[test]
fn commutes() -> unit {
  let a: )" + arr + R"(
  let b: )" + arr + R"(
  let ab: )" + arr + R"(
  let ba: )" + arr + R"(
  let c: bool
entry:
  a = symbolic )" + arr + R"( "a"
  b = symbolic )" + arr + R"( "b"
  ab = call merge_vc(a, b)
  ba = call merge_vc(b, a)
  c = eq ab, ba
  assert c "merge must commute"
  ret ()
}
)";
  (void)iw;
  return text;
}

}  // namespace

TEST(Exec, StraightLineAdd) {
  Harness h(R"(
fn f(a: bv8, b: bv8) -> bv8 {
  let c: bv8
entry:
  c = add a, b
  ret c
}
)");
  TermId a = h.tt.fresh_symbol("a", Sort::bitvec(8)), b = h.tt.fresh_symbol("b", Sort::bitvec(8));
  SymVal r = h.call("f", {a, b});
  EXPECT_EQ(r.term, h.tt.mk(Op::BvAdd, {a, b}));
  EXPECT_TRUE(h.ex->obligations().empty());
  EXPECT_TRUE(h.s.alive);
}

TEST(Exec, MergeClocksIte) {
  Harness h(kMergeClocks);
  TermId a = h.tt.fresh_symbol("a", Sort::bitvec(32)), b = h.tt.fresh_symbol("b", Sort::bitvec(32));
  SymVal r = h.call("merge_clocks", {a, b});
  EXPECT_EQ(r.term, h.tt.mk_ite(h.tt.mk(Op::BvUGt, {a, b}), a, b));
  EXPECT_TRUE(h.tt.is_true(h.s.pc));
}

TEST(Exec, EarlyReturnMatchesEnumeration) {
  Harness h(R"(
fn f(a: bv2, b: bv2) -> bv2 {
  let c: bool
  let x: bv2
entry:
  c = ult a, b
  br c early rest
early:
  x = sub b, a
  ret x
rest:
  x = add a, b
  c = eq x, 0:bv2
  br c z nz
z:
  x = 3:bv2
  goto done
nz:
  goto done
done:
  ret x
}
)");
  TermId a = h.tt.fresh_symbol("a", Sort::bitvec(2)), b = h.tt.fresh_symbol("b", Sort::bitvec(2));
  SymVal r = h.call("f", {a, b});
  auto expect = [](unsigned x, unsigned y) -> unsigned {
    if (x < y) return (y - x) & 3;
    unsigned s = (x + y) & 3;
    return s == 0 ? 3 : s;
  };
  for (unsigned x = 0; x < 4; ++x) {
    for (unsigned y = 0; y < 4; ++y) {
      EXPECT_EQ(h.tt.eval(r.term, env2(h.tt, a, x, b, y)).bits(), expect(x, y)) << x << "," << y;
    }
  }
}

TEST(Exec, ConcreteLoopUnrollsExactly) {
  Harness h(R"(
fn sum(a: [bv8; 8]) -> bv8 {
  let s: bv8
  let i: bv8
  let c: bool
  let x: bv8
entry:
  s = 0:bv8
  i = 0:bv8
  goto header
header:
  c = ult i, 8:bv8
  br c body done
body:
  x = index a[i]
  s = add s, x
  i = add i, 1:bv8
  goto header
done:
  ret s
}
)");
  TermId a = h.tt.fresh_symbol("a", Sort::array(Sort::bitvec(8), 8));
  SymVal r = h.call("sum", {a});
  // one bounds obligation per unrolling, no feasibility queries
  EXPECT_EQ(h.ex->obligations().size(), 8u);
  EXPECT_EQ(h.ex->solver().stats().queries, 0u);
  std::mt19937 rng(4);
  for (int k = 0; k < 50; ++k) {
    Env e;
    unsigned total = 0;
    for (const auto& s : h.tt.symbols()) {
      unsigned v = rng() & 0xff;
      total += v;
      e[s.ordinal] = Value::bitvec(v, 8);
    }
    EXPECT_EQ(h.tt.eval(r.term, e).bits(), total & 0xff);
  }
}

TEST(Exec, SymbolicBoundLoop) {
  const char* text = R"(
fn twice(n: bv8) -> bv8 {
  let s: bv8
  let i: bv8
  let c: bool
entry:
  s = 0:bv8
  i = 0:bv8
  goto header
header:
  c = ult i, n
  br c body done
body:
  s = add s, 2:bv8
  i = add i, 1:bv8
  goto header
done:
  ret s
}
#[test]
fn t() -> unit {
  let n: bv8
  let c: bool
  let s: bv8
  let d: bv8
entry:
  n = symbolic bv8 "n"
  c = ult n, 4:bv8
  assume c
  s = call twice(n)
  d = add n, n
  c = eq s, d
  assert c
  ret ()
}
)";
  ExecConfig cfg;
  auto out = run(text, "t", cfg);
  EXPECT_EQ(out.verdict, Verdict::Proven) << out.reason;
  EXPECT_GT(out.stats.solver.solver_calls, 0u);
  cfg.max_unroll = 3;
  EXPECT_EQ(run(text, "t", cfg).verdict, Verdict::Proven);
  cfg.max_unroll = 2;
  auto bad = run(text, "t", cfg);
  EXPECT_EQ(bad.verdict, Verdict::EngineError);
  EXPECT_NE(bad.reason.find("unroll bound"), std::string::npos);

  // merged result against brute force over n in 0..3
  Harness h(text);
  TermId n = h.tt.fresh_symbol("n", Sort::bitvec(8));
  h.ex->assume(h.s, h.tt.mk(Op::BvULt, {n, h.tt.bv_const(4, 8)}));
  SymVal r = h.call("twice", {n});
  for (unsigned v = 0; v < 4; ++v) {
    Env e{{h.tt.node(n).ordinal, Value::bitvec(v, 8)}};
    EXPECT_EQ(h.tt.eval(r.term, e).bits(), 2 * v);
  }
}

TEST(Exec, WhileTrueHitsBound) {
  auto out = run(R"(
#[test]
fn spin() -> unit {
entry:
  goto l
l:
  goto l
}
)",
                 "spin");
  EXPECT_EQ(out.verdict, Verdict::EngineError);
  EXPECT_NE(out.reason.find("unroll bound exceeded"), std::string::npos);
  EXPECT_NE(out.reason.find("spin:l"), std::string::npos) << out.reason;
}

TEST(Exec, CheckedAddOverflowRefuted) {
  auto out = run(R"(
#[test]
fn t() -> unit {
  let x: bv8
entry:
  x = checked_add 255:bv8, 1:bv8
  ret ()
}
)",
                 "t");
  ASSERT_EQ(out.verdict, Verdict::Refuted);
  EXPECT_EQ(out.obligations[*out.failing].ob.kind, ObligationKind::Overflow);
  ASSERT_TRUE(out.replay);
  EXPECT_TRUE(out.replay->confirmed);
}

TEST(Exec, AssumeFalseIsVacuous) {
  auto out = run(R"(
#[test]
fn t() -> unit {
entry:
  assume false
  assert false
  ret ()
}
)",
                 "t");
  EXPECT_EQ(out.verdict, Verdict::Vacuous);
}

TEST(Exec, PanicBehindBranch) {
  std::string body = R"(
#[test]
fn t() -> unit {
  let a: bv8
  let c: bool
entry:
  a = symbolic bv8 "a"
  ASSUME
  c = ult a, 4:bv8
  br c bad ok
bad:
  panic "small input"
ok:
  ret ()
}
)";
  auto with = body;
  with.replace(with.find("ASSUME"), 6, "c = ugt a, 10:bv8\n  assume c");
  auto without = body;
  without.replace(without.find("ASSUME"), 6, "nop");
  EXPECT_EQ(run(with, "t").verdict, Verdict::Proven);
  auto out = run(without, "t");
  ASSERT_EQ(out.verdict, Verdict::Refuted);
  const auto& ob = out.obligations[*out.failing].ob;
  EXPECT_EQ(ob.kind, ObligationKind::Panic);
  EXPECT_EQ(ob.message, "small input");
  EXPECT_LT(out.model.find("a")->value.bits(), 4u);
  EXPECT_TRUE(out.replay->confirmed);
}

TEST(Exec, IndexBoundsWithAssume) {
  std::string body = R"(
#[test]
fn t() -> unit {
  let a: [bv8; 8]
  let i: bv4
  let c: bool
  let x: bv8
entry:
  a = symbolic [bv8; 8] "a"
  i = symbolic bv4 "i"
  ASSUME
  x = index a[i]
  ret ()
}
)";
  auto with = body;
  with.replace(with.find("ASSUME"), 6, "c = ult i, 8:bv4\n  assume c");
  auto without = body;
  without.replace(without.find("ASSUME"), 6, "nop");
  EXPECT_EQ(run(with, "t").verdict, Verdict::Proven);
  auto out = run(without, "t");
  ASSERT_EQ(out.verdict, Verdict::Refuted);
  EXPECT_EQ(out.obligations[*out.failing].ob.kind, ObligationKind::Bounds);
  EXPECT_GE(out.model.find("i")->value.bits(), 8u);
  EXPECT_TRUE(out.replay->confirmed);
  // exhaustive: the obligation fails exactly for i >= 8
  unsigned failing = 0;
  for (unsigned i = 0; i < 16; ++i) failing += i >= 8;
  EXPECT_EQ(failing, 8u);
}

TEST(Exec, CommutativityAndBuggyMerge) {
  auto good = run(merge_vc(4, 2, false), "commutes");
  EXPECT_EQ(good.verdict, Verdict::Proven) << good.reason;
  auto bad = run(merge_vc(4, 2, true), "commutes");
  ASSERT_EQ(bad.verdict, Verdict::Refuted) << bad.reason;
  ASSERT_TRUE(bad.replay);
  EXPECT_TRUE(bad.replay->confirmed);
  EXPECT_FALSE(bad.replay->model_inconsistent);
  bool differs = false;
  for (int i = 0; i < 2; ++i) {
    auto* x = bad.model.find("a[" + std::to_string(i) + "]");
    auto* y = bad.model.find("b[" + std::to_string(i) + "]");
    ASSERT_TRUE(x && y);
    differs |= x->value.bits() != y->value.bits();
  }
  EXPECT_TRUE(differs);
  // brute force at bv4, N=2 through the concrete interpreter
  Program p = must_parse(merge_vc(4, 2, true));
  unsigned violating = 0;
  for (unsigned v = 0; v < (1u << 16); v += 7) {
    InterpHooks hk;
    hk.symbolic = [&](const std::string&, const std::string& name, const Sort& s) {
      unsigned base = name == "a" ? v & 0xff : v >> 8;
      return Value::aggregate(s, {Value::bitvec(base & 15, 4), Value::bitvec(base >> 4, 4)});
    };
    Interpreter in(p, hk);
    violating += !in.run(*p.find_function("commutes")).failures.empty();
  }
  EXPECT_GT(violating, 0u);
}

TEST(Exec, ReplayDetectsInconsistentModel) {
  Program p = must_parse(R"(
#[test]
fn t() -> unit {
  let a: bv8
  let c: bool
entry:
  a = symbolic bv8 "a"
  c = ult a, 4:bv8
  assume c
  ret ()
}
)");
  InterpHooks h;
  h.symbolic = [](const std::string&, const std::string&, const Sort&) { return Value::bitvec(9, 8); };
  Obligation dummy;
  auto r = concrete_replay(p, p.functions[0], h, dummy, true);
  EXPECT_TRUE(r.model_inconsistent);
  EXPECT_FALSE(r.confirmed);
  EXPECT_FALSE(r.trace.empty());
}

TEST(Exec, ReplayOfProvenTestIsClean) {
  Program p = must_parse(merge_vc(4, 2, false));
  std::mt19937 rng(9);
  for (int k = 0; k < 200; ++k) {
    InterpHooks h;
    h.symbolic = [&](const std::string&, const std::string&, const Sort& s) {
      return value_at(s, rng() % value_count(s, 1u << 16));
    };
    Obligation dummy;
    auto r = concrete_replay(p, *p.find_function("commutes"), h, dummy, false);
    EXPECT_TRUE(r.failures.empty());
    EXPECT_FALSE(r.model_inconsistent);
    EXPECT_TRUE(r.error.empty()) << r.error;
  }
}

TEST(Exec, MergeStates) {
  Harness h(kMergeClocks);
  TermTable& tt = h.tt;
  TermId c = tt.fresh_symbol("c", Sort::boolean());
  TermId x = tt.fresh_symbol("x", Sort::bitvec(8));
  ExecState base;
  base.pc = tt.true_term();
  base.locals.resize(2);
  base.locals[0] = SymVal{x, std::nullopt};
  GuardedRef r = base.heap.alloc(tt, 0, Sort::bitvec(8), x);
  ExecState t = base, e = base;
  t.pc = tt.mk_and(base.pc, c);
  e.pc = tt.mk_and(base.pc, tt.mk_not(c));
  auto same = h.ex->merge_states(c, base.pc, t, e, "test");
  EXPECT_EQ(same.locals[0]->term, x);
  EXPECT_TRUE(tt.is_true(same.pc));

  t.locals[1] = SymVal{tt.bv_const(1, 8), std::nullopt};
  e.locals[1] = SymVal{tt.bv_const(2, 8), std::nullopt};
  std::vector<MemCheck> checks;
  t.heap.write(tt, r, tt.bv_const(7, 8), checks);
  auto m = h.ex->merge_states(c, base.pc, t, e, "test");
  EXPECT_EQ(m.locals[1]->term, tt.mk_ite(c, tt.bv_const(1, 8), tt.bv_const(2, 8)));
  EXPECT_EQ(m.heap.allocations().at(0).contents, tt.mk_ite(c, tt.bv_const(7, 8), x));
}

TEST(Exec, ReferencesThroughBranches) {
  auto out = run(R"(
#[test]
fn t() -> unit {
  let a: [bv8; 4]
  let r: ref<[bv8; 4]>
  let e: ref<bv8>
  let i: bv8
  let c: bool
  let x: bv8
entry:
  a = mkarray [0:bv8; 4]
  r = alloc [bv8; 4] a
  i = symbolic bv8 "i"
  c = ult i, 4:bv8
  assume c
  c = eq i, 2:bv8
  br c two other
two:
  e = refindex r[1:bv8]
  goto join
other:
  e = refindex r[i]
  goto join
join:
  store e, 9:bv8
  a = load r
  x = index a[1:bv8]
  c = eq i, 2:bv8
  br c check_one done
check_one:
  c = eq x, 9:bv8
  assert c "write went to slot 1"
  goto done
done:
  ret ()
}
)",
                 "t");
  EXPECT_EQ(out.verdict, Verdict::Proven) << out.reason;
}

TEST(Exec, OverridesMatchConcrete) {
  Harness h(R"(
fn r(x: bv8, k: bv8) -> bv8 {
  let y: bv8
entry:
  y = call rotl(x, k)
  ret y
}
fn q(x: bv8, k: bv8) -> bv8 {
  let y: bv8
entry:
  y = call rotr(x, k)
  ret y
}
fn s(a: [bv4; 4]) -> [bv4; 4] {
  let b: [bv4; 4]
entry:
  b = call sort(a)
  ret b
}
)");
  TermId x = h.tt.fresh_symbol("x", Sort::bitvec(8)), k = h.tt.fresh_symbol("k", Sort::bitvec(8));
  TermId rl = h.call("r", {x, k}).term, rr = h.call("q", {x, k}).term;
  std::mt19937 rng(1);
  for (int i = 0; i < 300; ++i) {
    unsigned xv = rng() & 0xff, kv = rng() & 0xff;
    unsigned sh = kv % 8;
    unsigned expl = ((xv << sh) | (xv >> ((8 - sh) % 8))) & 0xff;
    unsigned expr = ((xv >> sh) | (xv << ((8 - sh) % 8))) & 0xff;
    if (sh == 0) expl = expr = xv;
    auto e = env2(h.tt, x, xv, k, kv);
    EXPECT_EQ(h.tt.eval(rl, e).bits(), expl);
    EXPECT_EQ(h.tt.eval(rr, e).bits(), expr);
  }
  TermId a = h.tt.fresh_symbol("a", Sort::array(Sort::bitvec(4), 4));
  TermId sorted = h.call("s", {a}).term;
  for (int i = 0; i < 300; ++i) {
    Env e;
    std::vector<unsigned> vals;
    for (const auto& sy : h.tt.symbols()) {
      if (sy.name.rfind("a[", 0) != 0) continue;
      unsigned v = rng() & 15;
      vals.push_back(v);
      e[sy.ordinal] = Value::bitvec(v, 4);
    }
    std::sort(vals.begin(), vals.end());
    Value got = h.tt.eval(sorted, e);
    for (int j = 0; j < 4; ++j) EXPECT_EQ(got.members()[j].bits(), vals[j]);
  }
}

TEST(Exec, EnableSpecWithoutSummaryIsError) {
  auto out = run(kMergeClocks + std::string(R"(
#[spec_for(merge_clocks)]
fn spec() -> unit {
entry:
  ret ()
}
#[test]
fn t() -> unit {
entry:
  enable_spec spec
  ret ()
}
)"),
                 "t");
  EXPECT_EQ(out.verdict, Verdict::EngineError);
  EXPECT_NE(out.reason.find("no verified summary"), std::string::npos);
}

TEST(Exec, DivisionObligations) {
  auto out = run(R"(
#[test]
fn t() -> unit {
  let a: bv8
  let b: bv8
  let q: bv8
  let c: bool
entry:
  a = symbolic bv8 "a"
  b = symbolic bv8 "b"
  c = ugt b, 0:bv8
  assume c
  q = udiv a, b
  c = ule q, a
  assert c
  q = checked_mul a, b
  ret ()
}
)",
                 "t");
  ASSERT_EQ(out.verdict, Verdict::Refuted);
  EXPECT_EQ(out.obligations.size(), 3u);
  EXPECT_TRUE(out.obligations[0].valid);
  EXPECT_TRUE(out.obligations[1].valid);
  EXPECT_EQ(out.obligations[2].ob.kind, ObligationKind::Overflow);
  auto a = out.model.find("a")->value.bits(), b = out.model.find("b")->value.bits();
  EXPECT_GT(a * b, 255u);
  EXPECT_TRUE(out.replay->confirmed);
}

TEST(Exec, Determinism) {
  std::string text = merge_vc(4, 2, true);
  auto a = run(text, "commutes"), b = run(text, "commutes");
  ASSERT_EQ(a.obligations.size(), b.obligations.size());
  EXPECT_EQ(a.verdict, b.verdict);
  for (std::size_t i = 0; i < a.obligations.size(); ++i) {
    EXPECT_EQ(a.obligations[i].ob.location.str(), b.obligations[i].ob.location.str());
    EXPECT_EQ(a.obligations[i].valid, b.obligations[i].valid);
  }
  ASSERT_EQ(a.model.entries.size(), b.model.entries.size());
  for (std::size_t i = 0; i < a.model.entries.size(); ++i) EXPECT_EQ(a.model.entries[i].value, b.model.entries[i].value);
  EXPECT_EQ(a.stats.solver.clauses, b.stats.solver.clauses);
}
