#include <gtest/gtest.h>

#include <random>
#include <tuple>

#include "cruxlite/blast.hpp"
#include "cruxlite/error.hpp"
#include "cruxlite/sat.hpp"
#include "cruxlite/solver.hpp"
#include "sat_gen.hpp"

using namespace cruxlite;

using namespace testgen;


TEST(Cdcl, Examples) {
  Cnf a;
  a.num_vars = 2;
  a.add({1, 2});
  a.add({-1});
  SatResult r = cdcl_solve(a);
  ASSERT_TRUE(r.sat);
  EXPECT_FALSE(r.model[1]);
  EXPECT_TRUE(r.model[2]);

  Cnf b;
  b.num_vars = 1;
  b.add({1});
  b.add({-1});
  EXPECT_FALSE(cdcl_solve(b).sat);

  EXPECT_FALSE(cdcl_solve(pigeonhole(5, 4)).sat);
  EXPECT_TRUE(cdcl_solve(pigeonhole(4, 4)).sat);

  Cnf empty;
  empty.num_vars = 3;
  EXPECT_TRUE(cdcl_solve(empty).sat);
  Cnf empty_clause;
  empty_clause.num_vars = 1;
  empty_clause.add({});
  EXPECT_FALSE(cdcl_solve(empty_clause).sat);
}

TEST(Cdcl, MatchesBruteForceOnRandom3Cnf) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> nv(3, 20);
  int sat = 0;
  for (int it = 0; it < 1000; ++it) {
    int n = nv(rng);
    Cnf cnf = random_3cnf(rng, n);
    SatResult r = cdcl_solve(cnf, {static_cast<std::uint64_t>(it), false});
    bool expect = brute_sat(n, masks(cnf));
    ASSERT_EQ(r.sat, expect) << "instance " << it;
    if (r.sat) {
      ++sat;
      EXPECT_TRUE(satisfies(cnf, r.model));
    }
  }
  EXPECT_GT(sat, 100);
  EXPECT_LT(sat, 900);
}

TEST(Cdcl, LearnedClausesAreEntailed) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> nv(6, 12);
  std::uint64_t total = 0;
  for (int it = 0; it < 300; ++it) {
    int n = nv(rng);
    Cnf cnf = random_3cnf(rng, n);
    SatResult r = cdcl_solve(cnf, {0, true});
    std::vector<std::uint32_t> models;
    bool expect = brute_sat(n, masks(cnf), &models);
    ASSERT_EQ(r.sat, expect);
    Cnf learned;
    learned.num_vars = n;
    learned.clauses = r.learned;
    auto lm = masks(learned);
    total += lm.size();
    for (std::uint32_t a : models) {
      for (const auto& c : lm) ASSERT_TRUE((a & c.pos) | (~a & c.neg));
    }
    Cnf both = cnf;
    for (const auto& c : r.learned) both.add(c);
    EXPECT_EQ(brute_sat(n, masks(both)), expect);
  }
  EXPECT_GT(total, 0u);
}

TEST(Cdcl, DeterministicForSeed) {
  std::mt19937_64 rng(9);
  Cnf cnf = random_3cnf(rng, 60);
  SatResult a = cdcl_solve(cnf, {42, false});
  SatResult b = cdcl_solve(cnf, {42, false});
  EXPECT_EQ(a.sat, b.sat);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.stats.conflicts, b.stats.conflicts);
  EXPECT_EQ(a.stats.decisions, b.stats.decisions);
}

// ---------------------------------------------------------------------------
// Blasting: for each opcode, pin the inputs to every concrete value, solve,
// compare the circuit output with eval, and check the output is forced.


TEST(Blast, EveryOpcodeExhaustiveSmallWidths) {
  for (unsigned w = 1; w <= 4; ++w) {
    TermTable tt;
    for (const auto& c : opcode_cases(tt, w)) EXPECT_EQ(check_case(tt, c), "");
  }
}

TEST(Blast, AggregateOpcodes) {
  TermTable tt;
  Sort e = Sort::bitvec(2);
  TermId a0 = tt.fresh_symbol("a0", e), a1 = tt.fresh_symbol("a1", e), a2 = tt.fresh_symbol("a2", e);
  TermId i = tt.fresh_symbol("i", Sort::bitvec(2));
  TermId v = tt.fresh_symbol("v", e);
  TermId arr = tt.mk_array(e, {a0, a1, a2});
  EXPECT_EQ(check_case(tt, {"array_get", {a0, a1, a2, i}, tt.mk(Op::ArrayGet, {arr, i})}), "");
  TermId set = tt.mk(Op::ArraySet, {arr, i, v});
  EXPECT_EQ(check_case(tt, {"array_set", {a0, a1, a2, i, v}, tt.mk(Op::Eq, {set, tt.mk_array(e, {v, a1, a2})})}), "");
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(check_case(tt, {"array_set_member", {a0, a1, a2, i, v}, tt.member(set, k)}), "");
  }
  TermId t = tt.mk_tuple({a0, tt.mk_tuple({a1, a2})});
  EXPECT_EQ(check_case(tt, {"tuple_get", {a0, a1, a2}, tt.mk(Op::TupleGet, {tt.mk(Op::TupleGet, {t}, 1)}, 1)}), "");
  Sort var = Sort::variant("V", {{"A", e}, {"B", Sort::bitvec(3)}, {"C", Sort::unit()}});
  TermId sv = tt.fresh_symbol("s", var);
  std::vector<TermId> syms;
  for (TermId s : tt.symbols_in(sv)) syms.push_back(s);
  EXPECT_EQ(check_case(tt, {"variant_tag", syms, tt.mk(Op::VariantTag, {sv})}), "");
  EXPECT_EQ(check_case(tt, {"variant_get_b", syms, tt.mk(Op::VariantGet, {sv}, 1)}), "");
  TermId y3 = tt.fresh_symbol("y3", Sort::bitvec(3));
  std::vector<TermId> with_y = syms;
  with_y.push_back(y3);
  EXPECT_EQ(check_case(tt, {"variant_eq", with_y, tt.mk_eq(sv, tt.mk_variant(var, 1, y3))}), "");
}

TEST(Blast, SharedSubtermsBlastOnce) {
  TermTable tt;
  TermId x = tt.fresh_symbol("x", Sort::bitvec(16));
  TermId f = tt.mk(Op::BvMul, {tt.mk(Op::BvAdd, {x, tt.bv_const(3, 16)}), x});
  Blaster b1(tt);
  b1.bits(f);
  int one = b1.cnf().num_vars;
  Blaster b2(tt);
  b2.bits(tt.mk(Op::BvULt, {f, tt.mk(Op::BvXor, {f, x})}));
  int two = b2.cnf().num_vars;
  EXPECT_LT(two, one + 200);
  EXPECT_LT(two, 2 * one);
}

TEST(Blast, UgtAgreesWithEnumeration) {
  TermTable tt;
  TermId a = tt.fresh_symbol("a", Sort::bitvec(4)), b = tt.fresh_symbol("b", Sort::bitvec(4));
  EXPECT_EQ(check_case(tt, {"ugt", {a, b}, tt.mk(Op::BvUGt, {a, b})}), "");
}

// ---------------------------------------------------------------------------

TEST(CheckObligation, Examples) {
  TermTable tt;
  Solver solver(tt, {});
  TermId x = tt.fresh_symbol("x", Sort::bitvec(8));
  Obligation refl{{}, ObligationKind::Assert, tt.mk_eq(x, x), tt.true_term(), "", ""};
  CheckResult r = check_obligation(tt, solver, {}, refl);
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(r.fast_path);
  EXPECT_EQ(solver.stats().solver_calls, 0u);

  Obligation lt{{}, ObligationKind::Assert, tt.mk(Op::BvULt, {x, tt.bv_const(10, 8)}), tt.true_term(), "", ""};
  r = check_obligation(tt, solver, {}, lt);
  ASSERT_FALSE(r.valid);
  const ModelEntry* m = r.model.find("x");
  ASSERT_NE(m, nullptr);
  EXPECT_GE(m->value.bits(), 10u);
  EXPECT_FALSE(tt.eval(lt.claim, r.model.env()).as_bool());
  EXPECT_EQ(solver.stats().solver_calls, 1u);

  // with an assumption the claim becomes valid
  std::vector<TermId> assume{tt.mk(Op::BvULt, {x, tt.bv_const(5, 8)})};
  EXPECT_TRUE(check_obligation(tt, solver, assume, lt).valid);
}

TEST(CheckObligation, CommutativityAtBv4N2) {
  TermTable tt;
  Sort arr = Sort::array(Sort::bitvec(4), 2);
  TermId a = tt.fresh_symbol("a", arr), b = tt.fresh_symbol("b", arr);
  auto merge = [&](TermId p, TermId q) {
    std::vector<TermId> out;
    for (std::size_t i = 0; i < 2; ++i) {
      TermId pi = tt.member(p, i), qi = tt.member(q, i);
      out.push_back(tt.mk_ite(tt.mk(Op::BvUGt, {pi, qi}), pi, qi));
    }
    return tt.mk_array(Sort::bitvec(4), out);
  };
  TermId claim = tt.mk_eq(merge(a, b), merge(b, a));
  Solver solver(tt, {});
  Obligation ob{{}, ObligationKind::Assert, claim, tt.true_term(), "", ""};
  EXPECT_TRUE(check_obligation(tt, solver, {}, ob).valid);
  // enumeration oracle
  auto syms = tt.symbols();
  for (std::uint32_t k = 0; k < (1u << 16); ++k) {
    Env env;
    for (std::size_t s = 0; s < 4; ++s) env[syms[s].ordinal] = Value::bitvec((k >> (4 * s)) & 15, 4);
    ASSERT_TRUE(tt.eval(claim, env).as_bool());
  }
  // the buggy first-projection merge is refuted
  auto first = [&](TermId p, TermId) { return p; };
  Obligation bad{{}, ObligationKind::Assert, tt.mk_eq(first(a, b), first(b, a)), tt.true_term(), "", ""};
  CheckResult r = check_obligation(tt, solver, {}, bad);
  ASSERT_FALSE(r.valid);
  EXPECT_FALSE(tt.eval(bad.claim, r.model.env()).as_bool());
}

TEST(CheckObligation, DeterministicStats) {
  auto run = [] {
    TermTable tt;
    TermId x = tt.fresh_symbol("x", Sort::bitvec(12)), y = tt.fresh_symbol("y", Sort::bitvec(12));
    TermId claim = tt.mk(Op::BvULe, {tt.mk(Op::BvMul, {x, y}), tt.mk(Op::BvAdd, {x, y})});
    Solver s(tt, {});
    Obligation ob{{}, ObligationKind::Assert, claim, tt.true_term(), "", ""};
    CheckResult r = check_obligation(tt, s, {}, ob);
    return std::make_tuple(r.valid, r.model.env().size(), tt.eval(claim, r.model.env()).as_bool(),
                           s.stats().clauses, s.stats().conflicts, r.model.entries[0].value.bits(),
                           r.model.entries[1].value.bits());
  };
  EXPECT_EQ(run(), run());
}

// ---------------------------------------------------------------------------

TEST(SmtLib, Emission) {
  TermTable tt;
  TermId b = tt.fresh_symbol("b", Sort::boolean());
  std::string s = emit_smtlib(tt, b);
  EXPECT_EQ(s, "(set-logic QF_BV)\n(declare-const |b!0| Bool)\n(assert |b!0|)\n(check-sat)\n");
  TermId x = tt.fresh_symbol("x", Sort::array(Sort::bitvec(8), 3));
  TermId i = tt.fresh_symbol("i", Sort::bitvec(2));
  TermId q = tt.mk_and(b, tt.mk(Op::BvULt, {tt.mk(Op::ArrayGet, {x, i}), tt.bv_const(7, 8)}));
  std::string one = emit_smtlib(tt, q, true);
  EXPECT_EQ(one, emit_smtlib(tt, q, true));
  EXPECT_NE(one.find("(declare-const |x[1]!2| (_ BitVec 8))"), std::string::npos);
  EXPECT_NE(one.find("(get-model)"), std::string::npos);
  EXPECT_NE(one.find("#x07"), std::string::npos);
}

TEST(SmtLib, ParseOutput) {
  EXPECT_EQ(parse_solver_output("unsat\n").status, QueryStatus::Unsat);
  ExternalVerdict v = parse_solver_output("sat\n(\n  (define-fun |x!0| () (_ BitVec 8) #x2a)\n"
                                          "  (define-fun |p!3| () Bool true)\n"
                                          "  (define-fun |y!1| () (_ BitVec 3) #b101)\n"
                                          "  (define-fun |z!2| () (_ BitVec 16) (_ bv300 16)))\n");
  ASSERT_EQ(v.status, QueryStatus::Sat);
  EXPECT_EQ(v.model.at(0), Value::bitvec(42, 8));
  EXPECT_EQ(v.model.at(1), Value::bitvec(5, 3));
  EXPECT_EQ(v.model.at(2), Value::bitvec(300, 16));
  EXPECT_EQ(v.model.at(3), Value::boolean(true));
  EXPECT_EQ(parse_solver_output("unknown\n").status, QueryStatus::Unknown);
  EXPECT_EQ(parse_solver_output("(error \"boom\")").status, QueryStatus::Unknown);
  EXPECT_EQ(parse_solver_output("").status, QueryStatus::Unknown);
}

TEST(SmtLib, RunExternal) {
  EXPECT_EQ(run_external("cat >/dev/null; echo unsat", "(check-sat)\n").status, QueryStatus::Unsat);
  ExternalVerdict v =
      run_external("cat >/dev/null; echo sat; echo '((define-fun |x!0| () (_ BitVec 8) #x2a))'", "(check-sat)\n");
  ASSERT_EQ(v.status, QueryStatus::Sat);
  EXPECT_EQ(v.model.at(0), Value::bitvec(42, 8));
  EXPECT_EQ(run_external("grep -q check-sat {file} && echo unsat", "(check-sat)\n").status, QueryStatus::Unsat);
  ExternalVerdict t = run_external("sleep 5", "", 200);
  EXPECT_EQ(t.status, QueryStatus::Unknown);
  EXPECT_NE(t.reason.find("timeout"), std::string::npos);
  EXPECT_EQ(run_external("exit 3", "").status, QueryStatus::Unknown);

  TermTable tt;
  SolverConfig cfg;
  cfg.backend = Backend::External;
  cfg.solver_cmd = "cat >/dev/null; echo unknown";
  Solver s(tt, cfg);
  TermId x = tt.fresh_symbol("x", Sort::bitvec(8));
  Obligation ob{{}, ObligationKind::Assert, tt.mk(Op::BvULt, {x, tt.bv_const(3, 8)}), tt.true_term(), "", ""};
  EXPECT_THROW(check_obligation(tt, s, {}, ob), EngineError);
}
