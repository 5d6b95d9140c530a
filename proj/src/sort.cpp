#include "cruxlite/sort.hpp"

#include <functional>

#include "cruxlite/error.hpp"

namespace cruxlite {

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

Sort::Sort() : Sort(unit()) {}

Sort Sort::make(Node n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 1315423911u;
  h = mix(h, n.width);
  h = mix(h, n.length);
  h = mix(h, std::hash<std::string>{}(n.name));
  for (const auto& c : n.children) h = mix(h, c.hash());
  for (const auto& l : n.labels) h = mix(h, std::hash<std::string>{}(l));
  n.hash = h;
  return Sort(std::make_shared<const Node>(std::move(n)));
}

Sort Sort::boolean() {
  static const Sort s = make(Node{.kind = SortKind::Bool});
  return s;
}

Sort Sort::bitvec(unsigned width) {
  if (width == 0 || width > kMaxBitWidth) {
    throw SortError("bit-vector width " + std::to_string(width) + " outside 1..128");
  }
  return make(Node{.kind = SortKind::BitVec, .width = width});
}

Sort Sort::unit() {
  static const Sort s = make(Node{.kind = SortKind::Unit});
  return s;
}

Sort Sort::array(Sort elem, std::uint64_t length) {
  Node n{.kind = SortKind::Array, .length = length};
  n.children.push_back(std::move(elem));
  return make(std::move(n));
}

Sort Sort::tuple(std::vector<Sort> elems) {
  Node n{.kind = SortKind::Tuple};
  n.children = std::move(elems);
  return make(std::move(n));
}

Sort Sort::record(std::string name, std::vector<std::pair<std::string, Sort>> fields) {
  Node n{.kind = SortKind::Record, .name = std::move(name)};
  for (auto& [label, s] : fields) {
    n.labels.push_back(std::move(label));
    n.children.push_back(std::move(s));
  }
  return make(std::move(n));
}

Sort Sort::variant(std::string name, std::vector<std::pair<std::string, Sort>> arms) {
  if (arms.empty()) throw SortError("variant " + name + " has no arms");
  if (arms.size() > (1u << kVariantTagWidth)) {
    throw SortError("variant " + name + " has more than 256 arms");
  }
  Node n{.kind = SortKind::Variant, .name = std::move(name)};
  for (auto& [label, s] : arms) {
    n.labels.push_back(std::move(label));
    n.children.push_back(std::move(s));
  }
  return make(std::move(n));
}

Sort Sort::reference(Sort pointee) {
  Node n{.kind = SortKind::Reference};
  n.children.push_back(std::move(pointee));
  return make(std::move(n));
}

std::size_t Sort::member_index(const std::string& label) const {
  const auto& ls = node_->labels;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (ls[i] == label) return i;
  }
  return npos;
}

bool Sort::contains_reference() const {
  if (is_ref()) return true;
  for (const auto& c : node_->children) {
    if (c.contains_reference()) return true;
  }
  return false;
}

std::uint64_t Sort::flat_bits() const {
  switch (kind()) {
    case SortKind::Bool: return 1;
    case SortKind::BitVec: return width();
    case SortKind::Unit: return 0;
    case SortKind::Array: return length() * elem().flat_bits();
    case SortKind::Tuple:
    case SortKind::Record: {
      std::uint64_t n = 0;
      for (const auto& c : members()) n += c.flat_bits();
      return n;
    }
    case SortKind::Variant: {
      std::uint64_t n = kVariantTagWidth;
      for (const auto& c : members()) n += c.flat_bits();
      return n;
    }
    case SortKind::Reference: break;
  }
  throw SortError("reference sort has no flat representation");
}

std::string Sort::str() const {
  switch (kind()) {
    case SortKind::Bool: return "bool";
    case SortKind::BitVec: return "bv" + std::to_string(width());
    case SortKind::Unit: return "unit";
    case SortKind::Array: return "[" + elem().str() + "; " + std::to_string(length()) + "]";
    case SortKind::Tuple: {
      std::string s = "(";
      for (std::size_t i = 0; i < members().size(); ++i) {
        if (i) s += ", ";
        s += members()[i].str();
      }
      // A one-element tuple keeps a trailing comma so it reparses as a tuple.
      if (members().size() == 1) s += ",";
      return s + ")";
    }
    case SortKind::Record:
    case SortKind::Variant: return name();
    case SortKind::Reference: return "ref<" + elem().str() + ">";
  }
  return "?";
}

bool operator==(const Sort& a, const Sort& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.hash == y.hash && x.kind == y.kind && x.width == y.width &&
         x.length == y.length && x.name == y.name && x.labels == y.labels &&
         x.children == y.children;
}

}  // namespace cruxlite
