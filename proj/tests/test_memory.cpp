#include <gtest/gtest.h>

#include <random>

#include "cruxlite/error.hpp"
#include "cruxlite/memory.hpp"

using namespace cruxlite;

namespace {

PathStep field(std::size_t i) { return PathStep{PathStep::Kind::Field, i, {}}; }
PathStep arm(std::size_t i) { return PathStep{PathStep::Kind::Arm, i, {}}; }
PathStep at(TermId t) { return PathStep{PathStep::Kind::Index, 0, t}; }

Env zero_env(const TermTable& tt) {
  Env env;
  for (const auto& s : tt.symbols()) env[s.ordinal] = Value::zero(s.sort);
  return env;
}

std::uint32_t ord(const TermTable& tt, TermId t) { return tt.node(t).ordinal; }

}  // namespace

TEST(Memory, AllocAndLoad) {
  TermTable tt;
  Heap h;
  Sort arr = Sort::array(Sort::bitvec(32), 8);
  TermId zeros = tt.constant(Value::zero(arr));
  GuardedRef r = h.alloc(tt, 0, arr, zeros);
  EXPECT_TRUE(r.alts.at(0).path.empty());
  EXPECT_TRUE(tt.is_true(r.alts[0].guard));
  std::vector<MemCheck> checks;
  EXPECT_EQ(h.read(tt, r, checks), zeros);
  GuardedRef r2 = h.alloc(tt, 1, arr, zeros);
  EXPECT_NE(r.alts[0].alloc, r2.alts[0].alloc);
  Sort tup = Sort::tuple({Sort::bitvec(8), Sort::bitvec(8)});
  TermId x = tt.fresh_symbol("x", Sort::bitvec(8)), y = tt.fresh_symbol("y", Sort::bitvec(8));
  GuardedRef r3 = h.alloc(tt, 2, tup, tt.mk_tuple({x, y}));
  EXPECT_EQ(h.read(tt, project(tt, r3, field(1)), checks), y);
}

TEST(Memory, ConcreteIndexRead) {
  TermTable tt;
  Heap h;
  TermId arr = tt.fresh_symbol("a", Sort::array(Sort::bitvec(8), 8));
  GuardedRef r = h.alloc(tt, 0, tt.sort(arr), arr);
  std::vector<MemCheck> checks;
  TermId v = h.read(tt, project(tt, r, at(tt.bv_const(3, 8))), checks);
  EXPECT_EQ(v, tt.node(arr).children[3]);
  ASSERT_EQ(checks.size(), 1u);
  EXPECT_TRUE(tt.is_true(checks[0].claim));
}

TEST(Memory, SymbolicIndexRead) {
  TermTable tt;
  Heap h;
  TermId a0 = tt.fresh_symbol("a0", Sort::bitvec(8)), a1 = tt.fresh_symbol("a1", Sort::bitvec(8));
  TermId arr = tt.mk_array(Sort::bitvec(8), {a0, a1});
  TermId i = tt.fresh_symbol("i", Sort::bitvec(2));
  GuardedRef r = h.alloc(tt, 0, tt.sort(arr), arr);
  std::vector<MemCheck> checks;
  TermId v = h.read(tt, project(tt, r, at(i)), checks);
  EXPECT_EQ(v, tt.mk_ite(tt.mk_eq(i, tt.bv_const(0, 2)), a0, a1));
  ASSERT_EQ(checks.size(), 1u);
  EXPECT_EQ(checks[0].claim, tt.mk(Op::BvULt, {i, tt.bv_const(2, 2)}));
  Env env = zero_env(tt);
  env[ord(tt, a0)] = Value::bitvec(10, 8);
  env[ord(tt, a1)] = Value::bitvec(11, 8);
  for (unsigned k = 0; k < 3; ++k) {
    env[ord(tt, i)] = Value::bitvec(k, 2);
    bool in_range = tt.eval(checks[0].claim, env).as_bool();
    EXPECT_EQ(in_range, k < 2);
    if (in_range) EXPECT_EQ(tt.eval(v, env), Value::bitvec(10 + k, 8));
  }
}

TEST(Memory, MergedRefRead) {
  TermTable tt;
  Heap h;
  TermId v1 = tt.fresh_symbol("v1", Sort::bitvec(8)), v2 = tt.fresh_symbol("v2", Sort::bitvec(8));
  TermId g = tt.fresh_symbol("g", Sort::boolean());
  GuardedRef r1 = h.alloc(tt, 0, Sort::bitvec(8), v1);
  GuardedRef r2 = h.alloc(tt, 1, Sort::bitvec(8), v2);
  GuardedRef m = mux_refs(tt, g, r1, r2);
  ASSERT_EQ(m.alts.size(), 2u);
  EXPECT_EQ(m.alts[0].guard, g);
  EXPECT_EQ(m.alts[1].guard, tt.mk_not(g));
  std::vector<MemCheck> checks;
  EXPECT_EQ(h.read(tt, m, checks), tt.mk_ite(g, v1, v2));
  // identical refs coalesce
  GuardedRef same = mux_refs(tt, g, r1, r1);
  ASSERT_EQ(same.alts.size(), 1u);
  EXPECT_TRUE(tt.is_true(same.alts[0].guard));
}

TEST(Memory, WriteThenRead) {
  TermTable tt;
  Heap h;
  TermId arr = tt.fresh_symbol("a", Sort::array(Sort::bitvec(8), 4));
  GuardedRef r = h.alloc(tt, 0, tt.sort(arr), arr);
  TermId v = tt.fresh_symbol("v", Sort::bitvec(8));
  std::vector<MemCheck> checks;
  GuardedRef e = project(tt, r, at(tt.bv_const(2, 3)));
  h.write(tt, e, v, checks);
  EXPECT_EQ(h.read(tt, e, checks), v);
}

TEST(Memory, SymbolicWriteSymbolicReadEnumeration) {
  TermTable tt;
  Heap h;
  TermId arr = tt.fresh_symbol("a", Sort::array(Sort::bitvec(4), 3));
  TermId i = tt.fresh_symbol("i", Sort::bitvec(2)), j = tt.fresh_symbol("j", Sort::bitvec(2));
  TermId v = tt.fresh_symbol("v", Sort::bitvec(4));
  GuardedRef r = h.alloc(tt, 0, tt.sort(arr), arr);
  std::vector<MemCheck> wchecks, rchecks;
  h.write(tt, project(tt, r, at(i)), v, wchecks);
  TermId out = h.read(tt, project(tt, r, at(j)), rchecks);
  ASSERT_EQ(wchecks.size(), 1u);
  ASSERT_EQ(rchecks.size(), 1u);
  Env env = zero_env(tt);
  const auto& elems = tt.node(arr).children;
  std::uint64_t init[3] = {3, 9, 14};
  for (int k = 0; k < 3; ++k) env[ord(tt, elems[k])] = Value::bitvec(init[k], 4);
  env[ord(tt, v)] = Value::bitvec(7, 4);
  for (unsigned iv = 0; iv < 4; ++iv) {
    for (unsigned jv = 0; jv < 4; ++jv) {
      env[ord(tt, i)] = Value::bitvec(iv, 2);
      env[ord(tt, j)] = Value::bitvec(jv, 2);
      EXPECT_EQ(tt.eval(wchecks[0].claim, env).as_bool(), iv < 3);
      EXPECT_EQ(tt.eval(rchecks[0].claim, env).as_bool(), jv < 3);
      if (iv < 3 && jv < 3) {
        std::uint64_t expect = jv == iv ? 7 : init[jv];
        EXPECT_EQ(tt.eval(out, env), Value::bitvec(expect, 4)) << iv << "," << jv;
      }
    }
  }
}

TEST(Memory, GuardedWrite) {
  TermTable tt;
  Heap h;
  TermId x1 = tt.fresh_symbol("x1", Sort::bitvec(8)), x2 = tt.fresh_symbol("x2", Sort::bitvec(8));
  TermId x3 = tt.fresh_symbol("x3", Sort::bitvec(8));
  TermId g = tt.fresh_symbol("g", Sort::boolean());
  TermId v = tt.fresh_symbol("v", Sort::bitvec(8));
  GuardedRef r1 = h.alloc(tt, 0, Sort::bitvec(8), x1);
  GuardedRef r2 = h.alloc(tt, 1, Sort::bitvec(8), x2);
  h.alloc(tt, 2, Sort::bitvec(8), x3);
  std::vector<MemCheck> checks;
  h.write(tt, mux_refs(tt, g, r1, r2), v, checks);
  EXPECT_EQ(h.allocations().at(0).contents, tt.mk_ite(g, v, x1));
  EXPECT_EQ(h.allocations().at(1).contents, tt.mk_ite(tt.mk_not(g), v, x2));
  EXPECT_EQ(h.allocations().at(2).contents, x3);  // frame property
}

TEST(Memory, ProjectPaths) {
  TermTable tt;
  Heap h;
  Sort rec = Sort::record("R", {{"x", Sort::array(Sort::bitvec(8), 2)}, {"y", Sort::bitvec(8)}});
  TermId init = tt.fresh_symbol("r", rec);
  GuardedRef r = h.alloc(tt, 0, rec, init);
  GuardedRef p = project(tt, project(tt, r, field(0)), at(tt.bv_const(1, 1)));
  ASSERT_EQ(p.alts[0].path.size(), 2u);
  EXPECT_EQ(p.alts[0].path[0].kind, PathStep::Kind::Field);
  EXPECT_EQ(p.alts[0].path[1].kind, PathStep::Kind::Index);
  std::vector<MemCheck> checks;
  TermId v = h.read(tt, p, checks);
  EXPECT_EQ(tt.node(v).name, "r.x[1]");
  EXPECT_THROW(project(tt, r, arm(0)), SortError);
}

TEST(Memory, VariantPayloadWrite) {
  TermTable tt;
  Heap h;
  Sort var = Sort::variant("V", {{"A", Sort::bitvec(8)}, {"B", Sort::bitvec(8)}});
  TermId sv = tt.fresh_symbol("v", var);
  GuardedRef r = h.alloc(tt, 0, var, sv);
  std::vector<MemCheck> checks;
  h.write(tt, project(tt, r, arm(1)), tt.bv_const(5, 8), checks);
  TermId out = h.read(tt, r, checks);
  Env env = zero_env(tt);
  for (std::uint64_t tag = 0; tag < 2; ++tag) {
    for (const auto& s : tt.symbols()) {
      if (s.name == "v.tag") env[s.ordinal] = Value::bitvec(tag, 8);
      if (s.name == "v.A") env[s.ordinal] = Value::bitvec(1, 8);
      if (s.name == "v.B") env[s.ordinal] = Value::bitvec(2, 8);
    }
    Value got = tt.eval(out, env);
    EXPECT_EQ(got.arm(), tag);
    EXPECT_EQ(got.payload(), Value::bitvec(tag == 1 ? 5 : 1, 8));
  }
}

TEST(Memory, ThreeWayMuxAssociativity) {
  TermTable tt;
  Heap h;
  std::vector<GuardedRef> refs;
  std::vector<TermId> vals;
  for (AllocId i = 0; i < 3; ++i) {
    vals.push_back(tt.bv_const(10 + i, 8));
    refs.push_back(h.alloc(tt, i, Sort::bitvec(8), vals.back()));
  }
  TermId c1 = tt.fresh_symbol("c1", Sort::boolean()), c2 = tt.fresh_symbol("c2", Sort::boolean());
  GuardedRef left = mux_refs(tt, c1, refs[0], mux_refs(tt, c2, refs[1], refs[2]));
  GuardedRef right = mux_refs(tt, tt.mk_or(c1, c2), mux_refs(tt, c1, refs[0], refs[1]), refs[2]);
  std::vector<MemCheck> checks;
  TermId lv = h.read(tt, left, checks), rv = h.read(tt, right, checks);
  Env env;
  for (int b1 = 0; b1 < 2; ++b1) {
    for (int b2 = 0; b2 < 2; ++b2) {
      env[ord(tt, c1)] = Value::boolean(b1);
      env[ord(tt, c2)] = Value::boolean(b2);
      EXPECT_EQ(tt.eval(lv, env), tt.eval(rv, env));
    }
  }
}

TEST(Memory, MuxCap) {
  TermTable tt;
  Heap h;
  GuardedRef acc = h.alloc(tt, 0, Sort::bitvec(8), tt.bv_const(0, 8));
  for (AllocId i = 1; i < 3; ++i) {
    TermId c = tt.fresh_symbol("c", Sort::boolean());
    acc = mux_refs(tt, c, h.alloc(tt, i, Sort::bitvec(8), tt.bv_const(i, 8)), acc, 3, "f:entry");
  }
  EXPECT_EQ(acc.alts.size(), 3u);
}

TEST(Memory, MuxCapExceeded) {
  TermTable tt;
  Heap h;
  GuardedRef acc = h.alloc(tt, 0, Sort::bitvec(8), tt.bv_const(0, 8));
  try {
    for (AllocId i = 1; i < 20; ++i) {
      TermId c = tt.fresh_symbol("c", Sort::boolean());
      acc = mux_refs(tt, c, h.alloc(tt, i, Sort::bitvec(8), tt.bv_const(i, 8)), acc, 16, "f:loop");
    }
    FAIL();
  } catch (const EngineError& e) {
    EXPECT_NE(std::string(e.what()).find("reference mux explosion"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("f:loop"), std::string::npos);
  }
}

TEST(Memory, DeadAllocation) {
  TermTable tt;
  Heap h;
  GuardedRef r = h.alloc(tt, 0, Sort::bitvec(8), tt.bv_const(1, 8));
  h.kill(0);
  std::vector<MemCheck> checks;
  EXPECT_THROW(h.read(tt, r, checks), EngineError);
  EXPECT_THROW(h.write(tt, r, tt.bv_const(2, 8), checks), EngineError);
  EXPECT_NE(h.dump().find("@0 : bv8 = %"), std::string::npos);
}

TEST(Memory, ReadAfterWriteRandom) {
  TermTable tt;
  Heap h;
  Sort arr = Sort::array(Sort::bitvec(8), 5);
  TermId a = tt.fresh_symbol("a", arr);
  TermId i = tt.fresh_symbol("i", Sort::bitvec(3));
  TermId v = tt.fresh_symbol("v", Sort::bitvec(8));
  TermId other = tt.fresh_symbol("o", Sort::bitvec(8));
  GuardedRef r = h.alloc(tt, 0, arr, a);
  GuardedRef ro = h.alloc(tt, 1, Sort::bitvec(8), other);
  std::vector<MemCheck> checks;
  GuardedRef e = project(tt, r, at(i));
  h.write(tt, e, v, checks);
  TermId back = h.read(tt, e, checks);
  EXPECT_EQ(h.allocations().at(1).contents, other);
  (void)ro;
  std::mt19937_64 rng(3);
  for (int n = 0; n < 1000; ++n) {
    Env env;
    for (const auto& s : tt.symbols()) env[s.ordinal] = Value::bitvec(rng(), s.sort.width());
    if (!tt.eval(checks[0].claim, env).as_bool()) continue;
    EXPECT_EQ(tt.eval(back, env), tt.eval(v, env));
  }
}
