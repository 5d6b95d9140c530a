#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cruxlite/sort.hpp"

namespace cruxlite {

using u128 = unsigned __int128;

/// All-ones mask for a width in 1..128.
constexpr u128 width_mask(unsigned width) {
  return width >= 128 ? ~u128{0} : ((u128{1} << width) - 1);
}

std::string u128_to_string(u128 v);
std::string u128_to_hex(u128 v, unsigned width);

/// One step of a concrete reference path.
struct ConcretePathStep {
  enum class Kind : std::uint8_t { Member, Arm, Index } kind;
  std::uint64_t index = 0;
  friend bool operator==(const ConcretePathStep&, const ConcretePathStep&) = default;
};

/// A concrete value of any sort. References only occur in the concrete
/// interpreter; term evaluation never produces them.
class Value {
 public:
  Value() = default;  // unit

  static Value boolean(bool b);
  static Value bitvec(u128 bits, unsigned width);
  static Value unit();
  /// Array, tuple or record from member values.
  static Value aggregate(Sort sort, std::vector<Value> members);
  static Value variant(Sort sort, std::size_t arm, Value payload);
  static Value reference(Sort sort, std::uint32_t alloc, std::vector<ConcretePathStep> path);
  /// The all-zero value: false, 0, arm 0 with zero payload, ...
  static Value zero(const Sort& sort);

  const Sort& sort() const { return sort_; }
  bool as_bool() const { return bits_ != 0; }
  u128 bits() const { return bits_; }
  unsigned width() const { return sort_.width(); }
  const std::vector<Value>& members() const { return members_; }
  std::vector<Value>& members() { return members_; }
  std::size_t arm() const { return static_cast<std::size_t>(bits_); }
  const Value& payload() const { return members_.front(); }
  std::uint32_t alloc() const { return static_cast<std::uint32_t>(bits_); }
  const std::vector<ConcretePathStep>& path() const { return path_; }

  std::string str() const;

  friend bool operator==(const Value& a, const Value& b);

 private:
  Sort sort_;
  u128 bits_ = 0;
  std::vector<Value> members_;
  std::vector<ConcretePathStep> path_;
};

/// Number of distinct values of a sort, saturating at `cap`.
std::uint64_t value_count(const Sort& sort, std::uint64_t cap);
/// The `index`-th value of a sort in a fixed enumeration order.
Value value_at(const Sort& sort, std::uint64_t index);

}  // namespace cruxlite
