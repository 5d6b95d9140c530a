#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "cruxlite/sat.hpp"
#include "cruxlite/term.hpp"

namespace cruxlite {

using Bits = std::vector<int>;  // LSB first

/// Tseitin bit-blaster over a TermTable. Gates are constant-folded and
/// structurally hashed, so shared or syntactically equal subcircuits are
/// encoded once. Variable 1 is the constant true.
class Blaster {
 public:
  explicit Blaster(const TermTable& tt);

  /// Flattened literals of a term (aggregates decompose structurally; a
  /// variant is its bv8 tag followed by every arm's payload, inactive arms
  /// zero).
  const Bits& bits(TermId t);
  int lit(TermId t);  // Bool terms
  void assert_lit(int l) { cnf_.add({l}); }

  int true_lit() const { return 1; }
  int false_lit() const { return -1; }

  const Cnf& cnf() const { return cnf_; }
  /// Literals of every scalar symbol reached, keyed by ordinal.
  const std::map<std::uint32_t, Bits>& symbol_bits() const { return symbols_; }
  /// Values of the reached symbols under a SAT model.
  Env decode(const std::vector<bool>& model) const;

  // gate layer
  int mk_and(int a, int b);
  int mk_or(int a, int b) { return -mk_and(-a, -b); }
  int mk_xor(int a, int b);
  int mk_ite(int c, int t, int e);
  int mk_and_all(const Bits& xs);
  int mk_or_all(const Bits& xs);

  // word layer
  Bits add(const Bits& a, const Bits& b, int carry_in);
  Bits sub(const Bits& a, const Bits& b);
  Bits mul(const Bits& a, const Bits& b);
  void divmod(const Bits& a, const Bits& b, Bits& quot, Bits& rem);
  Bits shl(const Bits& a, const Bits& s);
  Bits lshr(const Bits& a, const Bits& s);
  int ult(const Bits& a, const Bits& b);
  int slt(const Bits& a, const Bits& b);
  int eq(const Bits& a, const Bits& b);
  Bits ite(int c, const Bits& t, const Bits& e);
  Bits constant(u128 v, unsigned width) const;

 private:
  struct GateKey {
    std::array<int, 4> k;
    friend bool operator==(const GateKey&, const GateKey&) = default;
  };
  struct GateHash {
    std::size_t operator()(const GateKey& g) const;
  };

  void blast_node(TermId t);
  std::uint64_t member_offset(const Sort& s, std::size_t i) const;
  int eq_const(const Bits& a, u128 v);

  const TermTable& tt_;
  Cnf cnf_;
  std::vector<Bits> memo_;
  std::vector<std::uint8_t> done_;
  std::unordered_map<GateKey, int, GateHash> gates_;
  std::map<std::uint32_t, Bits> symbols_;
  std::map<std::uint32_t, Sort> symbol_sorts_;
};

}  // namespace cruxlite
