#include <gtest/gtest.h>

#include <random>

#include "cruxlite/compose.hpp"
#include "cruxlite/error.hpp"
#include "cruxlite/frontend.hpp"

using namespace cruxlite;

namespace {

Program must_parse(const std::string& text) {
  auto r = parse(text, "c.cir");
  if (!r.ok()) {
    ADD_FAILURE() << r.diagnostics.at(0).str();
    return {};
  }
  auto d = sort_check(*r.program);
  if (!d.empty()) ADD_FAILURE() << d[0].str();
  return *r.program;
}

const char* kClocks = R"(
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
fn ref_max(a: bv32, b: bv32) -> bv32 {
  let m: bv32
entry:
  m = call umax(a, b)
  ret m
}
fn merge_vc(a: [bv32; 8], b: [bv32; 8]) -> [bv32; 8] {
  let out: [bv32; 8]
  let i: bv8
  let c: bool
  let x: bv32
  let y: bv32
  let m: bv32
entry:
  out = mkarray [0:bv32; 8]
  i = 0:bv8
  goto header
header:
  c = ult i, 8:bv8
  br c body done
body:
  x = index a[i]
  y = index b[i]
  m = call merge_clocks(x, y)
  out = update out[i], m
  i = add i, 1:bv8
  goto header
done:
  ret out
}
fn ref_merge_vc(a: [bv32; 8], b: [bv32; 8]) -> [bv32; 8] {
  let out: [bv32; 8]
  let i: bv8
  let c: bool
  let x: bv32
  let y: bv32
  let m: bv32
entry:
  out = mkarray [0:bv32; 8]
  i = 0:bv8
  goto header
header:
  c = ult i, 8:bv8
  br c body done
body:
  x = index a[i]
  y = index b[i]
  m = call ref_max(x, y)
  out = update out[i], m
  i = add i, 1:bv8
  goto header
done:
  ret out
}
#[spec_for(merge_clocks)]
fn merge_c_equiv() -> unit {
  let a: bv32
  let b: bv32
  let out: bv32
  let exp: bv32
  let c: bool
entry:
  a = symbolic bv32 "a"
  b = symbolic bv32 "b"
  out = call merge_clocks(a, b)
  exp = call ref_max(a, b)
  c = eq out, exp
  assert c "merge_clocks agrees with ref_max"
  ret ()
}
#[test]
fn merge_vc_equiv() -> unit {
  let a: [bv32; 8]
  let b: [bv32; 8]
  let x: [bv32; 8]
  let y: [bv32; 8]
  let c: bool
entry:
  ENABLE
  a = symbolic [bv32; 8] "a"
  b = symbolic [bv32; 8] "b"
  x = call merge_vc(a, b)
  y = call ref_merge_vc(a, b)
  c = eq x, y
  assert c
  ret ()
}
)";

std::string clocks(bool enable) {
  std::string t = kClocks;
  t.replace(t.find("ENABLE"), 6, enable ? "enable_spec merge_c_equiv" : "nop");
  return t;
}

struct Verified {
  TestOutcome outcome;
  std::shared_ptr<const SpecSummary> summary;
};

Verified verify(const Program& p, const std::string& spec, const SummaryMap& in = {}) {
  ExecConfig cfg;
  const Function& f = *p.find_function(spec);
  Verified v;
  v.outcome = verify_spec(p, f, in, cfg);
  if (v.outcome.verdict == Verdict::Proven) {
    v.summary = std::make_shared<SpecSummary>(extract_summary(p, f, in, cfg, v.outcome));
  }
  return v;
}

const char* kBounded = R"(
fn f(x: bv8) -> bv8 {
  let y: bv8
entry:
  y = add x, x
  ret y
}
#[spec_for(f)]
fn f_spec() -> unit {
  let x: bv8
  let y: bv8
  let c: bool
entry:
  x = symbolic bv8 "x"
  c = ult x, 10:bv8
  assume c
  y = call f(x)
  c = ule y, 18:bv8
  assert c "f stays small"
  ret ()
}
#[test]
fn uses_f() -> unit {
  let x: bv8
  let y: bv8
  let c: bool
entry:
  enable_spec f_spec
  x = symbolic bv8 "x"
  ASSUME
  y = call f(x)
  c = ule y, 18:bv8
  assert c
  ret ()
}
#[test]
fn twice() -> unit {
  let x: bv8
  let y: bv8
  let z: bv8
  let c: bool
entry:
  enable_spec f_spec
  x = 3:bv8
  y = call f(x)
  z = call f(x)
  c = eq y, z
  assert c
  ret ()
}
)";

std::string bounded(bool constrained) {
  std::string t = kBounded;
  t.replace(t.find("ASSUME"), 6, constrained ? "c = ult x, 10:bv8\n  assume c" : "nop");
  return t;
}

}  // namespace

TEST(Compose, MergeCEquivSubstitution) {
  Program p = must_parse(clocks(true));
  auto v = verify(p, "merge_c_equiv");
  ASSERT_EQ(v.outcome.verdict, Verdict::Proven) << v.outcome.reason;
  ASSERT_TRUE(v.summary);
  EXPECT_EQ(v.summary->mode, SummaryMode::Substitution);
  EXPECT_EQ(v.summary->reference, "ref_max");
  EXPECT_TRUE(v.summary->table->is_true(v.summary->precondition));
  EXPECT_FALSE(v.summary->call_under_branch);
  auto j = summary_json(*v.summary);
  EXPECT_EQ(j["mode"], "Substitution");
  EXPECT_EQ(j["provenance"]["spec"], "merge_c_equiv");
}

TEST(Compose, MergeVcEquivWithSummary) {
  Program with = must_parse(clocks(true));
  Program without = must_parse(clocks(false));
  auto v = verify(with, "merge_c_equiv");
  SummaryMap m{{"merge_c_equiv", v.summary}};
  ExecConfig cfg;
  auto a = run_with_summaries(with, *with.find_function("merge_vc_equiv"), m, cfg);
  auto b = run_with_summaries(without, *without.find_function("merge_vc_equiv"), m, cfg);
  ASSERT_EQ(a.verdict, Verdict::Proven) << a.reason;
  ASSERT_EQ(b.verdict, Verdict::Proven) << b.reason;
  EXPECT_EQ(a.stats.body_runs.count("merge_clocks"), 0u);
  EXPECT_GT(b.stats.body_runs.at("merge_clocks"), 0u);
  EXPECT_LT(a.stats.solver.clauses, b.stats.solver.clauses);
  EXPECT_LT(a.stats.solver.vars, b.stats.solver.vars);
}

TEST(Compose, FalsifiableSpecRefusesExtraction) {
  std::string t = clocks(false);
  t.replace(t.find("exp = call ref_max(a, b)"), 24, "exp = add a, b");
  Program p = must_parse(t);
  ExecConfig cfg;
  const Function& spec = *p.find_function("merge_c_equiv");
  auto out = verify_spec(p, spec, {}, cfg);
  ASSERT_EQ(out.verdict, Verdict::Refuted);
  EXPECT_TRUE(out.replay->confirmed);
  EXPECT_THROW(extract_summary(p, spec, {}, cfg, out), ExtractionError);
}

TEST(Compose, SelfEnablingSpecIsCycle) {
  std::string t = clocks(false);
  t.replace(t.find("  a = symbolic bv32 \"a\"\n  b = symbolic bv32 \"b\"\n  out"), 0, "  enable_spec merge_c_equiv\n");
  Program p = must_parse(t);
  auto cyc = find_spec_cycle(p);
  ASSERT_EQ(cyc.size(), 2u);
  EXPECT_EQ(cyc[0], "merge_c_equiv");
  auto out = verify_spec(p, *p.find_function("merge_c_equiv"), {}, {});
  EXPECT_EQ(out.verdict, Verdict::EngineError);
  EXPECT_NE(out.reason.find("cyclic spec enablement: merge_c_equiv -> merge_c_equiv"), std::string::npos)
      << out.reason;
}

TEST(Compose, TwoCallsIsExtractionError) {
  std::string t = clocks(false);
  t.replace(t.find("exp = call ref_max(a, b)"), 24, "exp = call merge_clocks(b, a)");
  Program p = must_parse(t);
  ExecConfig cfg;
  const Function& spec = *p.find_function("merge_c_equiv");
  auto out = verify_spec(p, spec, {}, cfg);
  ASSERT_EQ(out.verdict, Verdict::Proven);
  try {
    extract_summary(p, spec, {}, cfg, out);
    FAIL() << "expected an extraction error";
  } catch (const ExtractionError& e) {
    EXPECT_NE(std::string(e.what()).find("only one call"), std::string::npos);
  }
}

TEST(Compose, AssumedEqualStatesFoldAway) {
  Program p = must_parse(R"(
fn rounds(s: [bv8; 2]) -> [bv8; 2] {
  let x: bv8
  let y: bv8
  let o: [bv8; 2]
entry:
  x = index s[0:bv1]
  y = index s[1:bv1]
  x = bxor x, y
  o = mkarray [x, y]
  ret o
}
fn ref_rounds(s: [bv8; 2]) -> [bv8; 2] {
  let x: bv8
  let y: bv8
  let o: [bv8; 2]
entry:
  x = index s[0:bv1]
  y = index s[1:bv1]
  x = bxor y, x
  o = mkarray [x, y]
  ret o
}
#[spec_for(rounds)]
fn rounds_equiv() -> unit {
  let s1: [bv8; 2]
  let s2: [bv8; 2]
  let o1: [bv8; 2]
  let o2: [bv8; 2]
  let c: bool
entry:
  s1 = symbolic [bv8; 2] "state1"
  s2 = symbolic [bv8; 2] "state2"
  c = eq s1, s2
  assume c
  o1 = call rounds(s1)
  o2 = call ref_rounds(s2)
  c = eq o1, o2
  assert c
  ret ()
}
)");
  auto v = verify(p, "rounds_equiv");
  ASSERT_EQ(v.outcome.verdict, Verdict::Proven) << v.outcome.reason;
  ASSERT_TRUE(v.summary);
  EXPECT_TRUE(v.summary->table->is_true(v.summary->precondition)) << v.summary->table->render(v.summary->precondition);
  EXPECT_EQ(v.summary->mode, SummaryMode::Substitution);
  EXPECT_EQ(v.summary->reference, "ref_rounds");
}

TEST(Compose, GeneralModePrecondition) {
  Program loose = must_parse(bounded(false));
  Program tight = must_parse(bounded(true));
  auto v = verify(loose, "f_spec");
  ASSERT_EQ(v.outcome.verdict, Verdict::Proven) << v.outcome.reason;
  ASSERT_EQ(v.summary->mode, SummaryMode::General);
  SummaryMap m{{"f_spec", v.summary}};
  ExecConfig cfg;
  auto bad = run_with_summaries(loose, *loose.find_function("uses_f"), m, cfg);
  ASSERT_EQ(bad.verdict, Verdict::Refuted);
  EXPECT_EQ(bad.obligations[*bad.failing].ob.kind, ObligationKind::SpecPrecondition);
  EXPECT_GE(bad.model.find("x")->value.bits(), 10u);
  EXPECT_TRUE(bad.replay->confirmed);
  auto good = run_with_summaries(tight, *tight.find_function("uses_f"), m, cfg);
  EXPECT_EQ(good.verdict, Verdict::Proven) << good.reason;
  EXPECT_EQ(good.stats.body_runs.count("f"), 0u);
}

TEST(Compose, DistinctResultPerCall) {
  Program p = must_parse(bounded(true));
  auto v = verify(p, "f_spec");
  SummaryMap m{{"f_spec", v.summary}};
  auto out = run_with_summaries(p, *p.find_function("twice"), m, {});
  // the summary only bounds each result, so two calls need not agree
  ASSERT_EQ(out.verdict, Verdict::Refuted);
  EXPECT_NE(out.model.find("f!ret")->value.bits(), out.model.entries.back().value.bits());
  ASSERT_TRUE(out.replay);
  EXPECT_TRUE(out.replay->confirmed);
  EXPECT_FALSE(out.replay->model_inconsistent);
}

TEST(Compose, EnableWithoutSummaryIsError) {
  Program p = must_parse(clocks(true));
  auto out = run_with_summaries(p, *p.find_function("merge_vc_equiv"), {}, {});
  EXPECT_EQ(out.verdict, Verdict::EngineError);
  EXPECT_NE(out.reason.find("no verified summary"), std::string::npos);
}

TEST(Compose, SubstitutionAgreesConcretely) {
  Program p = must_parse(clocks(false));
  std::mt19937_64 rng(17);
  Interpreter in(p, {});
  for (int i = 0; i < 1000; ++i) {
    std::vector<Value> args{Value::bitvec(rng() & 0xffffffff, 32), Value::bitvec(rng() & 0xffffffff, 32)};
    if (i % 4 == 0) args[1] = args[0];
    EXPECT_EQ(in.call(*p.find_function("merge_clocks"), args), in.call(*p.find_function("ref_max"), args));
  }
}
