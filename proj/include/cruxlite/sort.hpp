#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cruxlite {

enum class SortKind : std::uint8_t {
  Bool,
  BitVec,
  Unit,
  Array,
  Tuple,
  Record,
  Variant,
  Reference,
};

inline constexpr unsigned kMaxBitWidth = 128;
// VariantTag yields a bv8 arm index, so a variant has at most 256 arms.
inline constexpr unsigned kVariantTagWidth = 8;

/// Immutable value-semantic sort. Copies share the underlying node.
class Sort {
 public:
  Sort();  // Unit

  static Sort boolean();
  static Sort bitvec(unsigned width);
  static Sort unit();
  static Sort array(Sort elem, std::uint64_t length);
  static Sort tuple(std::vector<Sort> elems);
  static Sort record(std::string name, std::vector<std::pair<std::string, Sort>> fields);
  static Sort variant(std::string name, std::vector<std::pair<std::string, Sort>> arms);
  static Sort reference(Sort pointee);

  SortKind kind() const { return node_->kind; }
  bool is_bool() const { return kind() == SortKind::Bool; }
  bool is_bv() const { return kind() == SortKind::BitVec; }
  bool is_scalar() const { return is_bool() || is_bv(); }
  bool is_ref() const { return kind() == SortKind::Reference; }

  unsigned width() const { return node_->width; }
  std::uint64_t length() const { return node_->length; }
  const std::string& name() const { return node_->name; }

  /// Array element / reference pointee.
  const Sort& elem() const { return node_->children.front(); }
  /// Tuple elements, record field sorts or variant arm payload sorts.
  std::span<const Sort> members() const { return node_->children; }
  /// Record field names or variant arm names, parallel to members().
  std::span<const std::string> labels() const { return node_->labels; }
  std::size_t member_index(const std::string& label) const;  // npos when absent

  bool contains_reference() const;
  /// Number of propositional bits in the structural flattening.
  std::uint64_t flat_bits() const;

  std::size_t hash() const { return node_->hash; }
  std::string str() const;

  friend bool operator==(const Sort& a, const Sort& b);

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  struct Node {
    SortKind kind = SortKind::Unit;
    unsigned width = 0;
    std::uint64_t length = 0;
    std::string name;
    std::vector<Sort> children;
    std::vector<std::string> labels;
    std::size_t hash = 0;
  };
  explicit Sort(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Sort make(Node n);

  std::shared_ptr<const Node> node_;
};

struct SortHash {
  std::size_t operator()(const Sort& s) const { return s.hash(); }
};

}  // namespace cruxlite
