#pragma once

// CNF generators, a brute-force SAT oracle and per-opcode blasting checks.

#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "cruxlite/blast.hpp"
#include "cruxlite/sat.hpp"
#include "cruxlite/term.hpp"

namespace testgen {

using namespace cruxlite;

// Clause as (positive mask, negative mask) over <= 20 variables.
struct MaskClause {
  std::uint32_t pos = 0, neg = 0;
};

inline std::vector<MaskClause> masks(const Cnf& cnf) {
  std::vector<MaskClause> out;
  for (const auto& c : cnf.clauses) {
    MaskClause m;
    for (int l : c) (l > 0 ? m.pos : m.neg) |= 1u << (std::abs(l) - 1);
    out.push_back(m);
  }
  return out;
}

inline bool brute_sat(int n, const std::vector<MaskClause>& cs, std::vector<std::uint32_t>* all = nullptr) {
  bool any = false;
  for (std::uint32_t a = 0; a < (1u << n); ++a) {
    bool ok = true;
    for (const auto& c : cs) {
      if (!((a & c.pos) | (~a & c.neg))) {
        ok = false;
        break;
      }
    }
    if (ok) {
      any = true;
      if (!all) return true;
      all->push_back(a);
    }
  }
  return any;
}

inline Cnf random_3cnf(std::mt19937_64& rng, int n) {
  Cnf cnf;
  cnf.num_vars = n;
  std::uniform_int_distribution<int> var(1, n), coin(0, 1);
  int m = static_cast<int>(4.26 * n) + coin(rng);
  for (int i = 0; i < m; ++i) {
    std::vector<int> c;
    for (int k = 0; k < 3; ++k) c.push_back(coin(rng) ? var(rng) : -var(rng));
    cnf.add(c);
  }
  return cnf;
}

inline Cnf pigeonhole(int pigeons, int holes) {
  Cnf cnf;
  auto v = [&](int p, int h) { return p * holes + h + 1; };
  cnf.num_vars = pigeons * holes;
  for (int p = 0; p < pigeons; ++p) {
    std::vector<int> c;
    for (int h = 0; h < holes; ++h) c.push_back(v(p, h));
    cnf.add(c);
  }
  for (int h = 0; h < holes; ++h) {
    for (int p = 0; p < pigeons; ++p) {
      for (int q = p + 1; q < pigeons; ++q) cnf.add({-v(p, h), -v(q, h)});
    }
  }
  return cnf;
}

struct OpCase {
  std::string label;
  std::vector<TermId> inputs;
  TermId out;
};

// Each opcode over fresh symbols of width w (plus Bool connectives).
inline std::vector<OpCase> opcode_cases(TermTable& tt, unsigned w) {
  Sort bv = Sort::bitvec(w);
  TermId x = tt.fresh_symbol("x", bv), y = tt.fresh_symbol("y", bv);
  TermId p = tt.fresh_symbol("p", Sort::boolean()), q = tt.fresh_symbol("q", Sort::boolean());
  std::vector<OpCase> cases;
  for (Op op : {Op::BvAdd, Op::BvSub, Op::BvMul, Op::BvUDiv, Op::BvURem, Op::BvAnd, Op::BvOr, Op::BvXor, Op::BvShl,
                Op::BvLShr, Op::BvULt, Op::BvULe, Op::BvUGt, Op::BvUGe, Op::BvSLt, Op::BvSLe, Op::Eq, Op::BvConcat}) {
    cases.push_back({std::string(op_name(op)), {x, y}, tt.mk(op, {x, y})});
  }
  cases.push_back({"bvnot", {x}, tt.mk(Op::BvNot, {x})});
  cases.push_back({"bvneg", {x}, tt.mk(Op::BvNeg, {x})});
  cases.push_back({"zext", {x}, tt.mk_zext(x, w + 2)});
  if (w > 1) cases.push_back({"trunc", {x}, tt.mk_trunc(x, w - 1)});
  cases.push_back({"ite", {p, x, y}, tt.mk_ite(p, x, y)});
  for (Op op : {Op::And, Op::Or, Op::Xor, Op::Implies, Op::Eq}) {
    cases.push_back({std::string(op_name(op)) + "/bool", {p, q}, tt.mk(op, {p, q})});
  }
  cases.push_back({"not", {p}, tt.mk_not(p)});
  return cases;
}

// Pin the inputs to every concrete value, solve, compare the circuit output
// with eval, and check the output is forced. Returns "" or the first problem.
inline std::string check_case(TermTable& tt, const OpCase& c) {
  Blaster b(tt);
  Bits out = b.bits(c.out);
  std::vector<Bits> ins;
  for (TermId i : c.inputs) ins.push_back(b.bits(i));
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 1;
  for (TermId i : c.inputs) {
    counts.push_back(value_count(tt.sort(i), UINT64_MAX));
    total *= counts.back();
  }
  for (std::uint64_t k = 0; k < total; ++k) {
    Cnf cnf = b.cnf();
    Env env;
    std::uint64_t rest = k;
    for (std::size_t i = 0; i < c.inputs.size(); ++i) {
      Value v = value_at(tt.sort(c.inputs[i]), rest % counts[i]);
      rest /= counts[i];
      env[tt.node(c.inputs[i]).ordinal] = v;
      u128 bits = v.bits();
      for (std::size_t j = 0; j < ins[i].size(); ++j) cnf.add({((bits >> j) & 1) ? ins[i][j] : -ins[i][j]});
    }
    std::string where = c.label + " case " + std::to_string(k);
    SatResult r = cdcl_solve(cnf);
    if (!r.sat) return where + ": pinned inputs unsatisfiable";
    std::vector<bool> model_bits;
    for (int l : out) model_bits.push_back(l > 0 ? r.model[l] : !r.model[-l]);
    if (tt.sort(c.out).is_scalar()) {
      u128 ebits = tt.eval(c.out, env).bits();
      for (std::size_t j = 0; j < out.size(); ++j) {
        if (model_bits[j] != static_cast<bool>((ebits >> j) & 1)) return where + ": output differs from eval";
      }
    }
    std::vector<int> block;
    for (std::size_t j = 0; j < out.size(); ++j) block.push_back(model_bits[j] ? -out[j] : out[j]);
    cnf.add(block);
    if (cdcl_solve(cnf).sat) return where + ": output not forced";
  }
  return "";
}

}  // namespace testgen
