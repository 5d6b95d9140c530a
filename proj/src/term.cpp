#include "cruxlite/term.hpp"

#include <algorithm>
#include <sstream>

#include "cruxlite/error.hpp"

namespace cruxlite {

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Symbol: return "symbol";
    case Op::UnitConst: return "unit";
    case Op::Not: return "not";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Xor: return "xor";
    case Op::Implies: return "implies";
    case Op::Ite: return "ite";
    case Op::Eq: return "eq";
    case Op::BvAdd: return "bvadd";
    case Op::BvSub: return "bvsub";
    case Op::BvMul: return "bvmul";
    case Op::BvUDiv: return "bvudiv";
    case Op::BvURem: return "bvurem";
    case Op::BvAnd: return "bvand";
    case Op::BvOr: return "bvor";
    case Op::BvXor: return "bvxor";
    case Op::BvNot: return "bvnot";
    case Op::BvNeg: return "bvneg";
    case Op::BvShl: return "bvshl";
    case Op::BvLShr: return "bvlshr";
    case Op::BvULt: return "bvult";
    case Op::BvULe: return "bvule";
    case Op::BvUGt: return "bvugt";
    case Op::BvUGe: return "bvuge";
    case Op::BvSLt: return "bvslt";
    case Op::BvSLe: return "bvsle";
    case Op::BvZeroExtend: return "zext";
    case Op::BvTruncate: return "trunc";
    case Op::BvConcat: return "concat";
    case Op::MkTuple: return "mk_tuple";
    case Op::TupleGet: return "tuple_get";
    case Op::MkRecord: return "mk_record";
    case Op::RecordGet: return "record_get";
    case Op::MkArray: return "mk_array";
    case Op::ArrayGet: return "array_get";
    case Op::ArraySet: return "array_set";
    case Op::MkVariant: return "mk_variant";
    case Op::VariantTag: return "variant_tag";
    case Op::VariantGet: return "variant_get";
  }
  return "?";
}

bool is_constructor(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Symbol:
    case Op::UnitConst:
    case Op::MkTuple:
    case Op::MkRecord:
    case Op::MkArray:
    case Op::MkVariant: return true;
    default: return false;
  }
}

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

[[noreturn]] void sort_fail(Op op, const std::string& what) {
  throw SortError(std::string(op_name(op)) + ": " + what);
}

bool is_bv_binop(Op op) {
  switch (op) {
    case Op::BvAdd:
    case Op::BvSub:
    case Op::BvMul:
    case Op::BvUDiv:
    case Op::BvURem:
    case Op::BvAnd:
    case Op::BvOr:
    case Op::BvXor:
    case Op::BvShl:
    case Op::BvLShr: return true;
    default: return false;
  }
}

bool is_bv_compare(Op op) {
  switch (op) {
    case Op::BvULt:
    case Op::BvULe:
    case Op::BvUGt:
    case Op::BvUGe:
    case Op::BvSLt:
    case Op::BvSLe: return true;
    default: return false;
  }
}

using i128 = __int128;

i128 to_signed(u128 bits, unsigned w) {
  if (w == 128) return static_cast<i128>(bits);
  u128 sign = u128{1} << (w - 1);
  if (bits & sign) return static_cast<i128>(bits) - static_cast<i128>(u128{1} << w);
  return static_cast<i128>(bits);
}

Interval full_range(const Sort& s) {
  if (s.is_bool()) return {0, 1};
  return {0, width_mask(s.width())};
}

// Members of a MkTuple/MkRecord/MkArray array element count for OOB clamping.
std::size_t clamp_index(u128 index, std::uint64_t length) {
  if (index >= length) return static_cast<std::size_t>(length - 1);
  return static_cast<std::size_t>(index);
}

}  // namespace

std::size_t TermTable::KeyHash::operator()(const Key& k) const {
  std::size_t h = static_cast<std::size_t>(k.op);
  h = mix(h, static_cast<std::size_t>(k.param));
  h = mix(h, static_cast<std::size_t>(k.param >> 64));
  h = mix(h, k.sort.hash());
  h = mix(h, k.ordinal);
  for (auto c : k.children) h = mix(h, c.index);
  return h;
}

// ---------------------------------------------------------------------------
// Concrete semantics

Value apply_op(Op op, const Sort& result, u128 param, std::span<const Value> a) {
  auto bv = [&](u128 bits) { return Value::bitvec(bits, result.width()); };
  switch (op) {
    case Op::Const:
      return result.is_bool() ? Value::boolean(param != 0) : bv(param);
    case Op::UnitConst: return Value::unit();
    case Op::Symbol: break;
    case Op::Not: return Value::boolean(!a[0].as_bool());
    case Op::And: return Value::boolean(a[0].as_bool() && a[1].as_bool());
    case Op::Or: return Value::boolean(a[0].as_bool() || a[1].as_bool());
    case Op::Xor: return Value::boolean(a[0].as_bool() != a[1].as_bool());
    case Op::Implies: return Value::boolean(!a[0].as_bool() || a[1].as_bool());
    case Op::Ite: return a[0].as_bool() ? a[1] : a[2];
    case Op::Eq: return Value::boolean(a[0] == a[1]);
    case Op::BvAdd: return bv(a[0].bits() + a[1].bits());
    case Op::BvSub: return bv(a[0].bits() - a[1].bits());
    case Op::BvMul: return bv(a[0].bits() * a[1].bits());
    case Op::BvUDiv:
      return a[1].bits() == 0 ? bv(width_mask(result.width())) : bv(a[0].bits() / a[1].bits());
    case Op::BvURem: return a[1].bits() == 0 ? bv(0) : bv(a[0].bits() % a[1].bits());
    case Op::BvAnd: return bv(a[0].bits() & a[1].bits());
    case Op::BvOr: return bv(a[0].bits() | a[1].bits());
    case Op::BvXor: return bv(a[0].bits() ^ a[1].bits());
    case Op::BvNot: return bv(~a[0].bits());
    case Op::BvNeg: return bv(u128{0} - a[0].bits());
    case Op::BvShl:
      return a[1].bits() >= result.width() ? bv(0) : bv(a[0].bits() << static_cast<unsigned>(a[1].bits()));
    case Op::BvLShr:
      return a[1].bits() >= result.width() ? bv(0) : bv(a[0].bits() >> static_cast<unsigned>(a[1].bits()));
    case Op::BvULt: return Value::boolean(a[0].bits() < a[1].bits());
    case Op::BvULe: return Value::boolean(a[0].bits() <= a[1].bits());
    case Op::BvUGt: return Value::boolean(a[0].bits() > a[1].bits());
    case Op::BvUGe: return Value::boolean(a[0].bits() >= a[1].bits());
    case Op::BvSLt: {
      unsigned w = a[0].width();
      return Value::boolean(to_signed(a[0].bits(), w) < to_signed(a[1].bits(), w));
    }
    case Op::BvSLe: {
      unsigned w = a[0].width();
      return Value::boolean(to_signed(a[0].bits(), w) <= to_signed(a[1].bits(), w));
    }
    case Op::BvZeroExtend: return bv(a[0].bits());
    case Op::BvTruncate: return bv(a[0].bits());
    case Op::BvConcat: {
      unsigned lo_w = a[1].width();
      return bv((a[0].bits() << lo_w) | a[1].bits());
    }
    case Op::MkTuple:
    case Op::MkRecord:
    case Op::MkArray: return Value::aggregate(result, std::vector<Value>(a.begin(), a.end()));
    case Op::TupleGet:
    case Op::RecordGet: return a[0].members().at(static_cast<std::size_t>(param));
    case Op::ArrayGet: {
      const auto& elems = a[0].members();
      return elems.at(clamp_index(a[1].bits(), elems.size()));
    }
    case Op::ArraySet: {
      Value out = a[0];
      if (a[1].bits() < out.members().size()) {
        out.members()[static_cast<std::size_t>(a[1].bits())] = a[2];
      }
      return out;
    }
    case Op::MkVariant: return Value::variant(result, static_cast<std::size_t>(param), a[0]);
    case Op::VariantTag: return bv(a[0].arm());
    case Op::VariantGet:
      if (a[0].arm() == param) return a[0].payload();
      return Value::zero(result);
  }
  throw EvalError("cannot apply opcode " + std::string(op_name(op)));
}

// ---------------------------------------------------------------------------
// Sort inference

Sort TermTable::infer_sort(Op op, const std::vector<TermId>& ch, u128 param,
                           const std::optional<Sort>& hint) const {
  auto arity = [&](std::size_t n) {
    if (ch.size() != n) {
      sort_fail(op, "expected " + std::to_string(n) + " operands, got " + std::to_string(ch.size()));
    }
  };
  auto s = [&](std::size_t i) -> const Sort& { return sort(ch[i]); };
  auto same_bv = [&]() {
    arity(2);
    if (!s(0).is_bv() || !(s(0) == s(1))) {
      sort_fail(op, "operand sorts " + s(0).str() + ", " + s(1).str() + " are not equal bit-vectors");
    }
  };
  switch (op) {
    case Op::Const:
    case Op::Symbol:
      if (!hint || !hint->is_scalar()) sort_fail(op, "needs a scalar sort");
      return *hint;
    case Op::UnitConst: arity(0); return Sort::unit();
    case Op::Not:
      arity(1);
      if (!s(0).is_bool()) sort_fail(op, "operand sort " + s(0).str() + " is not bool");
      return Sort::boolean();
    case Op::And:
    case Op::Or:
    case Op::Xor:
    case Op::Implies:
      arity(2);
      if (!s(0).is_bool() || !s(1).is_bool()) {
        sort_fail(op, "operand sorts " + s(0).str() + ", " + s(1).str() + " are not bool");
      }
      return Sort::boolean();
    case Op::Ite:
      arity(3);
      if (!s(0).is_bool()) sort_fail(op, "condition sort " + s(0).str() + " is not bool");
      if (!(s(1) == s(2))) sort_fail(op, "branch sorts " + s(1).str() + ", " + s(2).str() + " differ");
      return s(1);
    case Op::Eq:
      arity(2);
      if (!(s(0) == s(1))) sort_fail(op, "operand sorts " + s(0).str() + ", " + s(1).str() + " differ");
      return Sort::boolean();
    case Op::BvNot:
    case Op::BvNeg:
      arity(1);
      if (!s(0).is_bv()) sort_fail(op, "operand sort " + s(0).str() + " is not a bit-vector");
      return s(0);
    case Op::BvZeroExtend:
      arity(1);
      if (!s(0).is_bv() || param < s(0).width() || param > kMaxBitWidth) {
        sort_fail(op, "cannot extend " + s(0).str() + " to width " + u128_to_string(param));
      }
      return Sort::bitvec(static_cast<unsigned>(param));
    case Op::BvTruncate:
      arity(1);
      if (!s(0).is_bv() || param == 0 || param > s(0).width()) {
        sort_fail(op, "cannot truncate " + s(0).str() + " to width " + u128_to_string(param));
      }
      return Sort::bitvec(static_cast<unsigned>(param));
    case Op::BvConcat:
      arity(2);
      if (!s(0).is_bv() || !s(1).is_bv() || s(0).width() + s(1).width() > kMaxBitWidth) {
        sort_fail(op, "cannot concatenate " + s(0).str() + " and " + s(1).str());
      }
      return Sort::bitvec(s(0).width() + s(1).width());
    case Op::MkTuple: {
      std::vector<Sort> elems;
      for (auto c : ch) elems.push_back(sort(c));
      return Sort::tuple(std::move(elems));
    }
    case Op::TupleGet:
    case Op::RecordGet: {
      arity(1);
      SortKind want = op == Op::TupleGet ? SortKind::Tuple : SortKind::Record;
      if (s(0).kind() != want || param >= s(0).members().size()) {
        sort_fail(op, "no member " + u128_to_string(param) + " in " + s(0).str());
      }
      return s(0).members()[static_cast<std::size_t>(param)];
    }
    case Op::MkRecord: {
      if (!hint || hint->kind() != SortKind::Record) sort_fail(op, "needs a record sort");
      if (hint->members().size() != ch.size()) sort_fail(op, "field count mismatch for " + hint->str());
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (!(hint->members()[i] == s(i))) {
          sort_fail(op, "field " + hint->labels()[i] + " expects " + hint->members()[i].str() +
                            ", got " + s(i).str());
        }
      }
      return *hint;
    }
    case Op::MkArray: {
      if (hint) {
        if (hint->kind() != SortKind::Array || hint->length() != ch.size()) {
          sort_fail(op, "array sort " + hint->str() + " does not fit " + std::to_string(ch.size()) + " elements");
        }
      } else if (ch.empty()) {
        sort_fail(op, "empty array needs an explicit sort");
      }
      Sort elem = hint ? hint->elem() : s(0);
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (!(s(i) == elem)) sort_fail(op, "element sort " + s(i).str() + " differs from " + elem.str());
      }
      return hint ? *hint : Sort::array(elem, ch.size());
    }
    case Op::ArrayGet:
      arity(2);
      if (s(0).kind() != SortKind::Array || s(0).length() == 0 || !s(1).is_bv()) {
        sort_fail(op, "cannot index " + s(0).str() + " with " + s(1).str());
      }
      return s(0).elem();
    case Op::ArraySet:
      arity(3);
      if (s(0).kind() != SortKind::Array || !s(1).is_bv() || !(s(0).elem() == s(2))) {
        sort_fail(op, "cannot store " + s(2).str() + " into " + s(0).str() + " at " + s(1).str());
      }
      return s(0);
    case Op::MkVariant:
      arity(1);
      if (!hint || hint->kind() != SortKind::Variant || param >= hint->members().size()) {
        sort_fail(op, "needs a variant sort with arm " + u128_to_string(param));
      }
      if (!(hint->members()[static_cast<std::size_t>(param)] == s(0))) {
        sort_fail(op, "payload sort " + s(0).str() + " does not match arm " +
                          hint->labels()[static_cast<std::size_t>(param)]);
      }
      return *hint;
    case Op::VariantTag:
      arity(1);
      if (s(0).kind() != SortKind::Variant) sort_fail(op, "operand sort " + s(0).str() + " is not a variant");
      return Sort::bitvec(kVariantTagWidth);
    case Op::VariantGet:
      arity(1);
      if (s(0).kind() != SortKind::Variant || param >= s(0).members().size()) {
        sort_fail(op, "no arm " + u128_to_string(param) + " in " + s(0).str());
      }
      return s(0).members()[static_cast<std::size_t>(param)];
    default: break;
  }
  if (is_bv_binop(op)) {
    same_bv();
    return s(0);
  }
  if (is_bv_compare(op)) {
    same_bv();
    return Sort::boolean();
  }
  sort_fail(op, "unknown opcode");
}

// ---------------------------------------------------------------------------
// Intervals

std::optional<Interval> TermTable::compute_interval(Op op, const std::vector<TermId>& ch, u128 param,
                                                    const Sort& s) const {
  if (!s.is_scalar()) return std::nullopt;
  const Interval full = full_range(s);
  auto iv = [&](std::size_t i) { return interval_of(ch[i]); };
  const u128 max = s.is_bv() ? width_mask(s.width()) : 1;
  switch (op) {
    case Op::Const: return Interval{param, param};
    case Op::Symbol: return full;
    case Op::Not: {
      auto a = iv(0);
      return Interval{1 - a.hi, 1 - a.lo};
    }
    case Op::And: {
      auto a = iv(0), b = iv(1);
      return Interval{a.lo & b.lo, a.hi & b.hi};
    }
    case Op::Or: {
      auto a = iv(0), b = iv(1);
      return Interval{a.lo | b.lo, a.hi | b.hi};
    }
    case Op::Implies: {
      auto a = iv(0), b = iv(1);
      return Interval{(1 - a.hi) | b.lo, (1 - a.lo) | b.hi};
    }
    case Op::Xor: {
      auto a = iv(0), b = iv(1);
      if (a.is_point() && b.is_point()) return Interval{a.lo ^ b.lo, a.lo ^ b.lo};
      return full;
    }
    case Op::Ite: {
      auto c = iv(0);
      auto a = interval_of(ch[1]), b = interval_of(ch[2]);
      if (c.lo == 1) return a;
      if (c.hi == 0) return b;
      return Interval{std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    }
    case Op::Eq: {
      const Sort& os = sort(ch[0]);
      if (!os.is_scalar()) return full;
      auto a = iv(0), b = iv(1);
      if (a.hi < b.lo || b.hi < a.lo) return Interval{0, 0};
      if (a.is_point() && b.is_point() && a.lo == b.lo) return Interval{1, 1};
      return full;
    }
    case Op::BvAdd: {
      auto a = iv(0), b = iv(1);
      if (a.hi <= max - b.hi) return Interval{a.lo + b.lo, a.hi + b.hi};
      return full;
    }
    case Op::BvSub: {
      auto a = iv(0), b = iv(1);
      if (a.lo >= b.hi) return Interval{a.lo - b.hi, a.hi - b.lo};
      return full;
    }
    case Op::BvMul: {
      auto a = iv(0), b = iv(1);
      if (a.hi == 0 || b.hi == 0) return Interval{0, 0};
      if (b.hi <= max / a.hi) return Interval{a.lo * b.lo, a.hi * b.hi};
      return full;
    }
    case Op::BvUDiv: {
      auto a = iv(0), b = iv(1);
      if (b.lo == 0) return full;
      return Interval{a.lo / b.hi, a.hi / b.lo};
    }
    case Op::BvURem: {
      auto a = iv(0), b = iv(1);
      if (b.hi == 0) return Interval{0, 0};
      return Interval{0, std::min(a.hi, b.hi - 1)};
    }
    case Op::BvAnd: {
      auto a = iv(0), b = iv(1);
      return Interval{0, std::min(a.hi, b.hi)};
    }
    case Op::BvOr:
    case Op::BvXor: {
      auto a = iv(0), b = iv(1);
      u128 m = std::max(a.hi, b.hi);
      u128 cover = 0;
      while (cover < m) cover = (cover << 1) | 1;
      if (op == Op::BvOr) return Interval{std::max(a.lo, b.lo), cover};
      return Interval{0, cover};
    }
    case Op::BvNot: {
      auto a = iv(0);
      return Interval{max - a.hi, max - a.lo};
    }
    case Op::BvNeg: {
      auto a = iv(0);
      if (a.is_point()) return Interval{(u128{0} - a.lo) & max, (u128{0} - a.lo) & max};
      if (a.lo > 0) return Interval{max - a.hi + 1, max - a.lo + 1};
      return full;
    }
    case Op::BvShl: {
      auto a = iv(0), b = iv(1);
      if (!b.is_point()) return full;
      if (b.lo >= s.width()) return Interval{0, 0};
      unsigned k = static_cast<unsigned>(b.lo);
      if (a.hi <= (max >> k)) return Interval{a.lo << k, a.hi << k};
      return full;
    }
    case Op::BvLShr: {
      auto a = iv(0), b = iv(1);
      if (b.lo >= s.width()) return Interval{0, 0};
      unsigned klo = static_cast<unsigned>(b.lo);
      unsigned khi = b.hi >= s.width() ? s.width() : static_cast<unsigned>(b.hi);
      u128 lo = khi >= s.width() ? 0 : (a.lo >> khi);
      return Interval{lo, a.hi >> klo};
    }
    case Op::BvULt:
    case Op::BvULe:
    case Op::BvUGt:
    case Op::BvUGe: {
      auto a = iv(0), b = iv(1);
      if (op == Op::BvUGt || op == Op::BvUGe) std::swap(a, b);
      bool strict = op == Op::BvULt || op == Op::BvUGt;
      // a < b  (or a <= b)
      if (strict) {
        if (a.hi < b.lo) return Interval{1, 1};
        if (a.lo >= b.hi) return Interval{0, 0};
      } else {
        if (a.hi <= b.lo) return Interval{1, 1};
        if (a.lo > b.hi) return Interval{0, 0};
      }
      return full;
    }
    case Op::BvSLt:
    case Op::BvSLe: {
      auto a = iv(0), b = iv(1);
      unsigned w = sort(ch[0]).width();
      u128 sign = u128{1} << (w - 1);
      auto one_side = [&](Interval x) { return x.hi < sign || x.lo >= sign; };
      if (!one_side(a) || !one_side(b)) return full;
      i128 alo = to_signed(a.lo, w), ahi = to_signed(a.hi, w);
      i128 blo = to_signed(b.lo, w), bhi = to_signed(b.hi, w);
      if (op == Op::BvSLt) {
        if (ahi < blo) return Interval{1, 1};
        if (alo >= bhi) return Interval{0, 0};
      } else {
        if (ahi <= blo) return Interval{1, 1};
        if (alo > bhi) return Interval{0, 0};
      }
      return full;
    }
    case Op::BvZeroExtend: return iv(0);
    case Op::BvTruncate: {
      auto a = iv(0);
      if (a.hi <= max) return a;
      if ((a.lo & ~max) == (a.hi & ~max)) return Interval{a.lo & max, a.hi & max};
      return full;
    }
    case Op::BvConcat: {
      auto hi = iv(0), lo = iv(1);
      unsigned lw = sort(ch[1]).width();
      if (lo.lo == 0 && lo.hi == width_mask(lw)) {
        return Interval{hi.lo << lw, (hi.hi << lw) | lo.hi};
      }
      if (hi.is_point()) return Interval{(hi.lo << lw) | lo.lo, (hi.lo << lw) | lo.hi};
      return Interval{hi.lo << lw, (hi.hi << lw) | width_mask(lw)};
    }
    case Op::VariantTag: return Interval{0, sort(ch[0]).members().size() - 1};
    default: return full;
  }
}

Interval TermTable::interval_of(TermId t) const {
  const auto& n = node(t);
  if (!n.interval) throw SortError("interval_of: term %" + std::to_string(t.index) + " of sort " + n.sort.str() + " is not numeric");
  return *n.interval;
}

bool TermTable::is_true(TermId t) const {
  const auto& n = node(t);
  return n.op == Op::Const && n.sort.is_bool() && n.param == 1;
}

bool TermTable::is_false(TermId t) const {
  const auto& n = node(t);
  return n.op == Op::Const && n.sort.is_bool() && n.param == 0;
}

std::optional<u128> TermTable::const_bits(TermId t) const {
  const auto& n = node(t);
  if (n.op == Op::Const) return n.param;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Construction

TermId TermTable::intern(TermNode n) {
  Key key{n.op, n.param, n.sort, n.children, n.ordinal};
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  TermId id{static_cast<std::uint32_t>(nodes_.size())};
  nodes_.push_back(std::move(n));
  index_.emplace(std::move(key), id);
  return id;
}

TermId TermTable::bool_const(bool b) {
  TermNode n;
  n.op = Op::Const;
  n.sort = Sort::boolean();
  n.param = b ? 1 : 0;
  n.interval = Interval{n.param, n.param};
  return intern(std::move(n));
}

TermId TermTable::bv_const(u128 bits, unsigned width) {
  TermNode n;
  n.op = Op::Const;
  n.sort = Sort::bitvec(width);
  n.param = bits & width_mask(width);
  n.interval = Interval{n.param, n.param};
  return intern(std::move(n));
}

TermId TermTable::unit_term() {
  TermNode n;
  n.op = Op::UnitConst;
  n.sort = Sort::unit();
  return intern(std::move(n));
}

TermId TermTable::constant(const Value& v) {
  const Sort& s = v.sort();
  switch (s.kind()) {
    case SortKind::Bool: return bool_const(v.as_bool());
    case SortKind::BitVec: return bv_const(v.bits(), s.width());
    case SortKind::Unit: return unit_term();
    case SortKind::Array:
    case SortKind::Tuple:
    case SortKind::Record: {
      std::vector<TermId> ms;
      for (const auto& m : v.members()) ms.push_back(constant(m));
      return rebuild(s, std::move(ms));
    }
    case SortKind::Variant: return mk_variant(s, v.arm(), constant(v.payload()));
    case SortKind::Reference: break;
  }
  throw SortError("constant: reference values have no term");
}

TermId TermTable::mk_and_all(std::span<const TermId> ts) {
  TermId acc = true_term();
  for (auto t : ts) acc = mk_and(acc, t);
  return acc;
}

TermId TermTable::mk_array(const Sort& elem, std::vector<TermId> elems) {
  Sort s = Sort::array(elem, elems.size());
  return mk(Op::MkArray, std::move(elems), 0, s);
}

TermId TermTable::mk_record(const Sort& sort, std::vector<TermId> fields) {
  return mk(Op::MkRecord, std::move(fields), 0, sort);
}

TermId TermTable::mk_variant(const Sort& sort, std::size_t arm, TermId payload) {
  return mk(Op::MkVariant, {payload}, arm, sort);
}

TermId TermTable::member(TermId t, std::size_t i) {
  const Sort& s = sort(t);
  switch (s.kind()) {
    case SortKind::Tuple: return mk(Op::TupleGet, {t}, i);
    case SortKind::Record: return mk(Op::RecordGet, {t}, i);
    case SortKind::Array: {
      unsigned w = 64;
      return mk(Op::ArrayGet, {t, bv_const(i, w)});
    }
    default: throw SortError("member: sort " + s.str() + " has no members");
  }
}

TermId TermTable::rebuild(const Sort& s, std::vector<TermId> ms) {
  switch (s.kind()) {
    case SortKind::Tuple: return mk(Op::MkTuple, std::move(ms));
    case SortKind::Record: return mk(Op::MkRecord, std::move(ms), 0, s);
    case SortKind::Array: return mk(Op::MkArray, std::move(ms), 0, s);
    default: throw SortError("rebuild: sort " + s.str() + " is not an aggregate");
  }
}

std::vector<TermId> TermTable::explode(TermId t) {
  const auto& n = node(t);
  if (n.op == Op::MkTuple || n.op == Op::MkRecord || n.op == Op::MkArray) return n.children;
  Sort s = n.sort;
  std::size_t count = s.kind() == SortKind::Array ? s.length() : s.members().size();
  std::vector<TermId> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(member(t, i));
  return out;
}

TermId TermTable::scalar_symbol(const std::string& name, const Sort& s) {
  TermNode n;
  n.op = Op::Symbol;
  n.sort = s;
  n.name = name;
  n.ordinal = next_ordinal_++;
  n.interval = full_range(s);
  n.ground = false;
  TermId id = intern(std::move(n));
  symbols_.push_back(SymbolInfo{name, node(id).ordinal, s, id});
  return id;
}

TermId TermTable::fresh_symbol(const std::string& name, const Sort& s) {
  switch (s.kind()) {
    case SortKind::Bool:
    case SortKind::BitVec: return scalar_symbol(name, s);
    case SortKind::Unit: return unit_term();
    case SortKind::Array: {
      std::vector<TermId> elems;
      for (std::uint64_t i = 0; i < s.length(); ++i) {
        elems.push_back(fresh_symbol(name + "[" + std::to_string(i) + "]", s.elem()));
      }
      return mk(Op::MkArray, std::move(elems), 0, s);
    }
    case SortKind::Tuple:
    case SortKind::Record: {
      std::vector<TermId> elems;
      for (std::size_t i = 0; i < s.members().size(); ++i) {
        std::string label = s.kind() == SortKind::Tuple ? std::to_string(i) : s.labels()[i];
        elems.push_back(fresh_symbol(name + "." + label, s.members()[i]));
      }
      return rebuild(s, std::move(elems));
    }
    case SortKind::Variant: {
      // Canonical shape: an Ite chain over a tag symbol selecting one
      // MkVariant per arm; the last arm absorbs out-of-range tags.
      TermId tag = scalar_symbol(name + ".tag", Sort::bitvec(kVariantTagWidth));
      std::vector<TermId> arms;
      for (std::size_t i = 0; i < s.members().size(); ++i) {
        TermId payload = fresh_symbol(name + "." + s.labels()[i], s.members()[i]);
        arms.push_back(mk_variant(s, i, payload));
      }
      TermId acc = arms.back();
      for (std::size_t i = arms.size() - 1; i-- > 0;) {
        acc = mk_ite(mk_eq(tag, bv_const(i, kVariantTagWidth)), arms[i], acc);
      }
      return acc;
    }
    case SortKind::Reference: break;
  }
  throw SortError("unsupported symbolic sort " + s.str() + ": references cannot be symbolic");
}

std::optional<TermId> TermTable::simplify(Op op, const std::vector<TermId>& ch, u128 param,
                                          const Sort& s) {
  auto is_zero = [&](TermId t) {
    auto c = const_bits(t);
    return c && *c == 0 && sort(t).is_bv();
  };
  auto complementary = [&](TermId a, TermId b) {
    return (node(a).op == Op::Not && node(a).children[0] == b) || (node(b).op == Op::Not && node(b).children[0] == a);
  };
  auto is_one = [&](TermId t) {
    auto c = const_bits(t);
    return c && *c == 1 && sort(t).is_bv();
  };

  // Constant folding: non-constructor over ground children.
  if (!is_constructor(op) && !ch.empty()) {
    bool ground = std::all_of(ch.begin(), ch.end(), [&](TermId c) { return node(c).ground; });
    if (ground) {
      std::vector<Value> args;
      args.reserve(ch.size());
      for (auto c : ch) args.push_back(eval(c, Env{}));
      return constant(apply_op(op, s, param, args));
    }
  }

  switch (op) {
    case Op::Not:
      if (node(ch[0]).op == Op::Not) return node(ch[0]).children[0];
      break;
    case Op::And:
      if (is_true(ch[0])) return ch[1];
      if (is_true(ch[1])) return ch[0];
      if (is_false(ch[0]) || is_false(ch[1])) return false_term();
      if (ch[0] == ch[1]) return ch[0];
      if (complementary(ch[0], ch[1])) return false_term();
      break;
    case Op::Or:
      if (is_false(ch[0])) return ch[1];
      if (is_false(ch[1])) return ch[0];
      if (is_true(ch[0]) || is_true(ch[1])) return true_term();
      if (ch[0] == ch[1]) return ch[0];
      if (complementary(ch[0], ch[1])) return true_term();
      break;
    case Op::Eq:
      if (ch[0] == ch[1]) return true_term();
      break;
    case Op::Ite:
      if (is_true(ch[0])) return ch[1];
      if (is_false(ch[0])) return ch[2];
      if (ch[1] == ch[2]) return ch[1];
      if (is_true(ch[1]) && is_false(ch[2])) return ch[0];
      break;
    case Op::BvAdd:
      if (is_zero(ch[1])) return ch[0];
      if (is_zero(ch[0])) return ch[1];
      break;
    case Op::BvXor:
      if (ch[0] == ch[1]) return bv_const(0, s.width());
      break;
    case Op::BvAnd:
      if (is_zero(ch[0]) || is_zero(ch[1])) return bv_const(0, s.width());
      break;
    case Op::BvMul:
      if (is_one(ch[1])) return ch[0];
      if (is_one(ch[0])) return ch[1];
      break;
    case Op::TupleGet:
      if (node(ch[0]).op == Op::MkTuple) return node(ch[0]).children[static_cast<std::size_t>(param)];
      break;
    case Op::RecordGet:
      if (node(ch[0]).op == Op::MkRecord) return node(ch[0]).children[static_cast<std::size_t>(param)];
      break;
    case Op::VariantGet:
      if (node(ch[0]).op == Op::MkVariant) {
        const auto& v = node(ch[0]);
        if (v.param == param) return v.children[0];
        return constant(Value::zero(s));
      }
      break;
    case Op::VariantTag:
      if (node(ch[0]).op == Op::MkVariant) return bv_const(node(ch[0]).param, kVariantTagWidth);
      break;
    case Op::ArrayGet:
      if (node(ch[0]).op == Op::MkArray) {
        if (auto i = const_bits(ch[1])) {
          const auto& elems = node(ch[0]).children;
          return elems[clamp_index(*i, elems.size())];
        }
      }
      break;
    case Op::ArraySet:
      if (node(ch[0]).op == Op::MkArray) {
        if (auto i = const_bits(ch[1])) {
          std::vector<TermId> elems = node(ch[0]).children;
          if (*i >= elems.size()) return ch[0];
          elems[static_cast<std::size_t>(*i)] = ch[2];
          return mk(Op::MkArray, std::move(elems), 0, s);
        }
      }
      break;
    default: break;
  }

  if (s.is_bool() && op != Op::Const && op != Op::Symbol) {
    auto iv = compute_interval(op, ch, param, s);
    if (iv && iv->is_point()) return bool_const(iv->lo != 0);
  }
  return std::nullopt;
}

TermId TermTable::mk(Op op, std::vector<TermId> children, u128 param, const std::optional<Sort>& hint) {
  if (op == Op::Symbol) throw SortError("mk: use fresh_symbol to create symbols");
  for (auto c : children) {
    if (!c.valid() || c.index >= nodes_.size()) throw SortError(std::string(op_name(op)) + ": dangling child");
  }
  if (op == Op::Const) {
    if (!hint) sort_fail(op, "needs a sort");
    if (hint->is_bool()) return bool_const(param != 0);
    if (hint->is_bv()) return bv_const(param, hint->width());
    sort_fail(op, "needs a scalar sort");
  }
  if (op == Op::UnitConst) return unit_term();
  Sort s = infer_sort(op, children, param, hint);
  if (s.contains_reference()) sort_fail(op, "terms cannot carry reference sort " + s.str());
  if (op == Op::BvZeroExtend && param == sort(children[0]).width()) return children[0];
  if (op == Op::BvTruncate && param == sort(children[0]).width()) return children[0];
  if (auto r = simplify(op, children, param, s)) return *r;
  TermNode n;
  n.op = op;
  n.sort = s;
  n.param = param;
  n.interval = compute_interval(op, children, param, s);
  n.ground = std::all_of(children.begin(), children.end(), [&](TermId c) { return node(c).ground; });
  n.children = std::move(children);
  return intern(std::move(n));
}

// ---------------------------------------------------------------------------
// Evaluation and traversal

Value TermTable::eval(TermId root, const Env& env) const {
  std::unordered_map<std::uint32_t, Value> memo;
  std::function<const Value&(TermId)> go = [&](TermId t) -> const Value& {
    if (auto it = memo.find(t.index); it != memo.end()) return it->second;
    const auto& n = node(t);
    Value v;
    if (n.op == Op::Symbol) {
      auto it = env.find(n.ordinal);
      if (it == env.end()) throw EvalError("no binding for symbol " + n.name + "!" + std::to_string(n.ordinal));
      if (!(it->second.sort() == n.sort)) {
        throw EvalError("binding for " + n.name + " has sort " + it->second.sort().str() + ", expected " + n.sort.str());
      }
      v = it->second;
    } else if (n.op == Op::Ite) {
      // Only the selected branch needs a value.
      bool c = go(n.children[0]).as_bool();
      v = go(n.children[c ? 1 : 2]);
    } else {
      std::vector<Value> args;
      args.reserve(n.children.size());
      for (auto c : n.children) args.push_back(go(c));
      v = apply_op(n.op, n.sort, n.param, args);
    }
    return memo.emplace(t.index, std::move(v)).first->second;
  };
  return go(root);
}

std::vector<TermId> TermTable::conjuncts(TermId t) const {
  std::vector<TermId> out;
  std::vector<TermId> stack{t};
  while (!stack.empty()) {
    TermId x = stack.back();
    stack.pop_back();
    const auto& n = node(x);
    if (n.op == Op::And) {
      stack.push_back(n.children[1]);
      stack.push_back(n.children[0]);
    } else if (!is_true(x)) {
      out.push_back(x);
    }
  }
  return out;
}

std::vector<TermId> TermTable::symbols_in(TermId t) const {
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<TermId> out;
  std::vector<TermId> stack{t};
  while (!stack.empty()) {
    TermId x = stack.back();
    stack.pop_back();
    if (seen[x.index]) continue;
    seen[x.index] = true;
    const auto& n = node(x);
    if (n.ground) continue;
    if (n.op == Op::Symbol) out.push_back(x);
    for (auto c : n.children) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TermId TermTable::substitute(TermId root, const std::unordered_map<TermId, TermId, TermIdHash>& map) {
  std::unordered_map<std::uint32_t, TermId> memo;
  std::function<TermId(TermId)> go = [&](TermId t) -> TermId {
    if (auto it = map.find(t); it != map.end()) return it->second;
    const TermNode& n0 = node(t);
    if (n0.ground || n0.op == Op::Symbol) return t;
    if (auto it = memo.find(t.index); it != memo.end()) return it->second;
    std::vector<TermId> kids;
    std::vector<TermId> orig = n0.children;
    Op op = n0.op;
    u128 param = n0.param;
    Sort s = n0.sort;
    for (auto c : orig) kids.push_back(go(c));
    TermId r = kids == orig ? t : mk(op, std::move(kids), param, s);
    memo.emplace(t.index, r);
    return r;
  };
  return go(root);
}

TermId TermTable::import(const TermTable& src, TermId root,
                         const std::unordered_map<TermId, TermId, TermIdHash>& symbol_map) {
  std::unordered_map<std::uint32_t, TermId> memo;
  std::function<TermId(TermId)> go = [&](TermId t) -> TermId {
    if (auto it = memo.find(t.index); it != memo.end()) return it->second;
    const TermNode& n = src.node(t);
    TermId r;
    if (n.op == Op::Symbol) {
      auto it = symbol_map.find(t);
      if (it == symbol_map.end()) throw SortError("import: unmapped symbol " + n.name);
      r = it->second;
    } else if (n.op == Op::Const) {
      r = mk(Op::Const, {}, n.param, n.sort);
    } else {
      std::vector<TermId> kids;
      for (auto c : n.children) kids.push_back(go(c));
      r = mk(n.op, std::move(kids), n.param, n.sort);
    }
    memo.emplace(t.index, r);
    return r;
  };
  return go(root);
}

// ---------------------------------------------------------------------------
// Printing

std::string TermTable::dump() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    os << '%' << i << " = " << op_name(n.op);
    if (n.op == Op::Const) {
      os << ' ' << (n.sort.is_bool() ? (n.param ? "true" : "false") : u128_to_string(n.param));
    } else if (n.op == Op::Symbol) {
      os << ' ' << n.name << '!' << n.ordinal;
    } else if (n.op == Op::TupleGet || n.op == Op::RecordGet || n.op == Op::MkVariant ||
               n.op == Op::VariantGet || n.op == Op::BvZeroExtend || n.op == Op::BvTruncate) {
      os << '.' << u128_to_string(n.param);
    }
    os << " [";
    for (std::size_t c = 0; c < n.children.size(); ++c) {
      if (c) os << ", ";
      os << '%' << n.children[c].index;
    }
    os << "] : " << n.sort.str();
    if (n.interval) os << " [" << u128_to_string(n.interval->lo) << ',' << u128_to_string(n.interval->hi) << ']';
    os << '\n';
  }
  return os.str();
}

void TermTable::render_into(TermId t, std::string& out, std::size_t budget) const {
  const auto& n = node(t);
  if (out.size() > budget) {
    out += '%' + std::to_string(t.index);
    return;
  }
  switch (n.op) {
    case Op::Const:
      if (n.sort.is_bool()) {
        out += n.param ? "true" : "false";
      } else {
        out += "#x" + u128_to_hex(n.param, n.sort.width());
        if (n.sort.width() % 4) out += ":bv" + std::to_string(n.sort.width());
      }
      return;
    case Op::Symbol: out += '|' + n.name + '!' + std::to_string(n.ordinal) + '|'; return;
    case Op::UnitConst: out += "()"; return;
    default: break;
  }
  out += '(';
  out += op_name(n.op);
  if (n.op == Op::TupleGet || n.op == Op::RecordGet || n.op == Op::MkVariant || n.op == Op::VariantGet ||
      n.op == Op::BvZeroExtend || n.op == Op::BvTruncate) {
    out += ' ' + u128_to_string(n.param);
  }
  for (auto c : n.children) {
    out += ' ';
    render_into(c, out, budget);
  }
  out += ')';
}

std::string TermTable::render(TermId t, std::size_t budget) const {
  std::string out;
  render_into(t, out, budget);
  return out;
}

}  // namespace cruxlite
