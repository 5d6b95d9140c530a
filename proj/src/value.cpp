#include "cruxlite/value.hpp"

#include <algorithm>

#include "cruxlite/error.hpp"

namespace cruxlite {

std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string u128_to_hex(u128 v, unsigned width) {
  static constexpr char kDigits[] = "0123456789abcdef";
  unsigned digits = (width + 3) / 4;
  std::string s(digits, '0');
  for (unsigned i = 0; i < digits; ++i) {
    s[digits - 1 - i] = kDigits[static_cast<unsigned>(v & 0xf)];
    v >>= 4;
  }
  return s;
}

Value Value::boolean(bool b) {
  Value v;
  v.sort_ = Sort::boolean();
  v.bits_ = b ? 1 : 0;
  return v;
}

Value Value::bitvec(u128 bits, unsigned width) {
  Value v;
  v.sort_ = Sort::bitvec(width);
  v.bits_ = bits & width_mask(width);
  return v;
}

Value Value::unit() { return Value(); }

Value Value::aggregate(Sort sort, std::vector<Value> members) {
  Value v;
  v.sort_ = std::move(sort);
  v.members_ = std::move(members);
  return v;
}

Value Value::variant(Sort sort, std::size_t arm, Value payload) {
  Value v;
  v.sort_ = std::move(sort);
  v.bits_ = arm;
  v.members_.push_back(std::move(payload));
  return v;
}

Value Value::reference(Sort sort, std::uint32_t alloc, std::vector<ConcretePathStep> path) {
  Value v;
  v.sort_ = std::move(sort);
  v.bits_ = alloc;
  v.path_ = std::move(path);
  return v;
}

Value Value::zero(const Sort& sort) {
  switch (sort.kind()) {
    case SortKind::Bool: return boolean(false);
    case SortKind::BitVec: return bitvec(0, sort.width());
    case SortKind::Unit: return unit();
    case SortKind::Array: {
      std::vector<Value> elems(sort.length(), zero(sort.elem()));
      return aggregate(sort, std::move(elems));
    }
    case SortKind::Tuple:
    case SortKind::Record: {
      std::vector<Value> elems;
      for (const auto& m : sort.members()) elems.push_back(zero(m));
      return aggregate(sort, std::move(elems));
    }
    case SortKind::Variant: return variant(sort, 0, zero(sort.members()[0]));
    case SortKind::Reference: break;
  }
  throw EvalError("reference sort has no zero value");
}

std::string Value::str() const {
  switch (sort_.kind()) {
    case SortKind::Bool: return bits_ ? "true" : "false";
    case SortKind::BitVec: return u128_to_string(bits_) + ":bv" + std::to_string(width());
    case SortKind::Unit: return "()";
    case SortKind::Array:
    case SortKind::Tuple:
    case SortKind::Record: {
      std::string open = sort_.kind() == SortKind::Array ? "[" : "(";
      std::string close = sort_.kind() == SortKind::Array ? "]" : ")";
      std::string s = sort_.kind() == SortKind::Record ? sort_.name() + " {" : open;
      for (std::size_t i = 0; i < members_.size(); ++i) {
        if (i) s += ", ";
        if (sort_.kind() == SortKind::Record) s += sort_.labels()[i] + ": ";
        s += members_[i].str();
      }
      return s + (sort_.kind() == SortKind::Record ? "}" : close);
    }
    case SortKind::Variant:
      return sort_.name() + "." + sort_.labels()[arm()] + "(" + payload().str() + ")";
    case SortKind::Reference: {
      std::string s = "&@" + std::to_string(alloc());
      for (const auto& p : path_) {
        s += p.kind == ConcretePathStep::Kind::Index ? "[" + std::to_string(p.index) + "]"
                                                     : "." + std::to_string(p.index);
      }
      return s;
    }
  }
  return "?";
}

bool operator==(const Value& a, const Value& b) {
  return a.bits_ == b.bits_ && a.members_ == b.members_ && a.path_ == b.path_ &&
         a.sort_ == b.sort_;
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b, std::uint64_t cap) {
  if (a == 0 || b == 0) return 0;
  if (a > cap / b) return cap;
  return std::min(a * b, cap);
}

}  // namespace

std::uint64_t value_count(const Sort& sort, std::uint64_t cap) {
  switch (sort.kind()) {
    case SortKind::Bool: return std::min<std::uint64_t>(2, cap);
    case SortKind::BitVec:
      return sort.width() >= 64 ? cap : std::min<std::uint64_t>(std::uint64_t{1} << sort.width(), cap);
    case SortKind::Unit: return 1;
    case SortKind::Array: {
      std::uint64_t n = 1;
      std::uint64_t e = value_count(sort.elem(), cap);
      for (std::uint64_t i = 0; i < sort.length(); ++i) n = sat_mul(n, e, cap);
      return n;
    }
    case SortKind::Tuple:
    case SortKind::Record: {
      std::uint64_t n = 1;
      for (const auto& m : sort.members()) n = sat_mul(n, value_count(m, cap), cap);
      return n;
    }
    case SortKind::Variant: {
      std::uint64_t n = 0;
      for (const auto& m : sort.members()) n = std::min(cap, n + value_count(m, cap));
      return n;
    }
    case SortKind::Reference: break;
  }
  throw EvalError("cannot enumerate reference values");
}

Value value_at(const Sort& sort, std::uint64_t index) {
  constexpr std::uint64_t kCap = ~std::uint64_t{0};
  switch (sort.kind()) {
    case SortKind::Bool: return Value::boolean(index & 1);
    case SortKind::BitVec: return Value::bitvec(index, sort.width());
    case SortKind::Unit: return Value::unit();
    case SortKind::Array: {
      std::uint64_t radix = value_count(sort.elem(), kCap);
      std::vector<Value> elems;
      for (std::uint64_t i = 0; i < sort.length(); ++i) {
        elems.push_back(value_at(sort.elem(), radix ? index % radix : 0));
        if (radix) index /= radix;
      }
      return Value::aggregate(sort, std::move(elems));
    }
    case SortKind::Tuple:
    case SortKind::Record: {
      std::vector<Value> elems;
      for (const auto& m : sort.members()) {
        std::uint64_t radix = value_count(m, kCap);
        elems.push_back(value_at(m, radix ? index % radix : 0));
        if (radix) index /= radix;
      }
      return Value::aggregate(sort, std::move(elems));
    }
    case SortKind::Variant: {
      for (std::size_t arm = 0; arm < sort.members().size(); ++arm) {
        std::uint64_t n = value_count(sort.members()[arm], kCap);
        if (index < n) return Value::variant(sort, arm, value_at(sort.members()[arm], index));
        index -= n;
      }
      return Value::zero(sort);
    }
    case SortKind::Reference: break;
  }
  throw EvalError("cannot enumerate reference values");
}

}  // namespace cruxlite
