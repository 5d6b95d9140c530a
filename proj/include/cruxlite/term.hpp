#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cruxlite/sort.hpp"
#include "cruxlite/value.hpp"

namespace cruxlite {

enum class Op : std::uint8_t {
  Const,
  Symbol,
  UnitConst,
  // boolean
  Not,
  And,
  Or,
  Xor,
  Implies,
  Ite,
  Eq,
  // bit-vector
  BvAdd,
  BvSub,
  BvMul,
  BvUDiv,
  BvURem,
  BvAnd,
  BvOr,
  BvXor,
  BvNot,
  BvNeg,
  BvShl,
  BvLShr,
  BvULt,
  BvULe,
  BvUGt,
  BvUGe,
  BvSLt,
  BvSLe,
  BvZeroExtend,
  BvTruncate,
  BvConcat,
  // aggregates
  MkTuple,
  TupleGet,
  MkRecord,
  RecordGet,
  MkArray,
  ArrayGet,
  ArraySet,
  MkVariant,
  VariantTag,
  VariantGet,
};

std::string_view op_name(Op op);
bool is_constructor(Op op);

struct TermId {
  std::uint32_t index = UINT32_MAX;
  bool valid() const { return index != UINT32_MAX; }
  friend auto operator<=>(const TermId&, const TermId&) = default;
};

struct TermIdHash {
  std::size_t operator()(TermId t) const { return std::hash<std::uint32_t>{}(t.index); }
};

/// Unsigned range; Bool terms use [0,1].
struct Interval {
  u128 lo = 0;
  u128 hi = 0;
  bool contains(u128 v) const { return lo <= v && v <= hi; }
  bool is_point() const { return lo == hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct TermNode {
  Op op = Op::UnitConst;
  std::vector<TermId> children;
  Sort sort;
  /// Const: the bits. TupleGet/RecordGet: member index. MkVariant/VariantGet:
  /// arm. BvZeroExtend/BvTruncate: target width.
  u128 param = 0;
  std::string name;            // Symbol
  std::uint32_t ordinal = 0;   // Symbol
  std::optional<Interval> interval;
  bool ground = true;          // no Symbol reachable
};

struct SymbolInfo {
  std::string name;
  std::uint32_t ordinal = 0;
  Sort sort;
  TermId term;
};

/// Concrete bindings for scalar symbols, keyed by ordinal.
using Env = std::unordered_map<std::uint32_t, Value>;

/// Hash-consed term DAG. Every node is simplified and sort-checked when it
/// is built; structurally equal nodes share one TermId.
class TermTable {
 public:
  TermTable() = default;

  /// Generic constructor. `sort` is needed for MkRecord, MkVariant and for
  /// MkArray with no elements; it is inferred otherwise.
  TermId mk(Op op, std::vector<TermId> children, u128 param = 0,
            const std::optional<Sort>& sort = std::nullopt);

  TermId bool_const(bool b);
  TermId true_term() { return bool_const(true); }
  TermId false_term() { return bool_const(false); }
  TermId bv_const(u128 bits, unsigned width);
  TermId unit_term();
  /// Constant term for any non-reference value (aggregates become constructors).
  TermId constant(const Value& v);

  TermId mk_not(TermId a) { return mk(Op::Not, {a}); }
  TermId mk_and(TermId a, TermId b) { return mk(Op::And, {a, b}); }
  TermId mk_or(TermId a, TermId b) { return mk(Op::Or, {a, b}); }
  TermId mk_implies(TermId a, TermId b) { return mk(Op::Implies, {a, b}); }
  TermId mk_ite(TermId c, TermId a, TermId b) { return mk(Op::Ite, {c, a, b}); }
  TermId mk_eq(TermId a, TermId b) { return mk(Op::Eq, {a, b}); }
  TermId mk_and_all(std::span<const TermId> ts);
  TermId mk_array(const Sort& elem, std::vector<TermId> elems);
  TermId mk_tuple(std::vector<TermId> elems) { return mk(Op::MkTuple, std::move(elems)); }
  TermId mk_record(const Sort& sort, std::vector<TermId> fields);
  TermId mk_variant(const Sort& sort, std::size_t arm, TermId payload);
  TermId mk_zext(TermId t, unsigned width) { return mk(Op::BvZeroExtend, {t}, width); }
  TermId mk_trunc(TermId t, unsigned width) { return mk(Op::BvTruncate, {t}, width); }
  /// Member `i` of a tuple, record or array (array index as a constant).
  TermId member(TermId t, std::size_t i);
  /// Build an aggregate of the given sort from its members.
  TermId rebuild(const Sort& sort, std::vector<TermId> members);
  /// The members of an aggregate term (projections, simplified).
  std::vector<TermId> explode(TermId t);

  /// New symbolic value; aggregates expand to constructors over fresh scalar
  /// symbols named after their position ("a[0]", "a.x", ...).
  TermId fresh_symbol(const std::string& name, const Sort& sort);

  const TermNode& node(TermId t) const { return nodes_.at(t.index); }
  const Sort& sort(TermId t) const { return node(t).sort; }
  Op op(TermId t) const { return node(t).op; }
  std::size_t size() const { return nodes_.size(); }

  Interval interval_of(TermId t) const;
  bool is_true(TermId t) const;
  bool is_false(TermId t) const;
  std::optional<u128> const_bits(TermId t) const;

  /// Every scalar symbol created, in ordinal order.
  const std::vector<SymbolInfo>& symbols() const { return symbols_; }

  Value eval(TermId t, const Env& env) const;

  /// Split nested And nodes into their leaves, left to right.
  std::vector<TermId> conjuncts(TermId t) const;
  /// Scalar symbol terms reachable from t, in TermId order.
  std::vector<TermId> symbols_in(TermId t) const;
  /// Rebuild t replacing the mapped subterms (typically symbols).
  TermId substitute(TermId t, const std::unordered_map<TermId, TermId, TermIdHash>& map);
  /// Copy a term from another table. Every symbol reachable from t must be
  /// mapped; the map is keyed by TermIds of `src`.
  TermId import(const TermTable& src, TermId t,
                const std::unordered_map<TermId, TermId, TermIdHash>& symbol_map);

  /// `%<id> = <opcode> [<child ids>] : <sort> [lo,hi]`, one line per node.
  std::string dump() const;
  /// S-expression rendering for reports; subterms past `budget` characters
  /// are elided as `%<id>`.
  std::string render(TermId t, std::size_t budget = 4096) const;

 private:
  struct Key {
    Op op;
    u128 param;
    Sort sort;
    std::vector<TermId> children;
    std::uint32_t ordinal;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  TermId scalar_symbol(const std::string& name, const Sort& sort);
  TermId intern(TermNode node);
  std::optional<TermId> simplify(Op op, const std::vector<TermId>& ch, u128 param, const Sort& s);
  Sort infer_sort(Op op, const std::vector<TermId>& ch, u128 param,
                  const std::optional<Sort>& sort) const;
  std::optional<Interval> compute_interval(Op op, const std::vector<TermId>& ch, u128 param,
                                           const Sort& s) const;
  void render_into(TermId t, std::string& out, std::size_t budget) const;

  std::vector<TermNode> nodes_;
  std::unordered_map<Key, TermId, KeyHash> index_;
  std::vector<SymbolInfo> symbols_;
  std::uint32_t next_ordinal_ = 0;
};

/// Apply an opcode to concrete arguments (shared by eval and constant folding).
Value apply_op(Op op, const Sort& result, u128 param, std::span<const Value> args);

}  // namespace cruxlite
