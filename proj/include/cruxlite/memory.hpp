#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cruxlite/term.hpp"

namespace cruxlite {

using AllocId = std::uint32_t;

struct PathStep {
  enum class Kind : std::uint8_t { Field, Arm, Index };
  Kind kind = Kind::Field;
  std::size_t index = 0;  // Field: member, Arm: arm
  TermId term;            // Index: bit-vector index term
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct RefAlt {
  TermId guard;
  AllocId alloc = 0;
  std::vector<PathStep> path;
};

/// Reference as guarded (allocation, path) alternatives with exclusive guards.
struct GuardedRef {
  std::vector<RefAlt> alts;
  Sort pointee;
};

struct Allocation {
  Sort sort;
  TermId contents;
  bool live = true;
};

/// Side condition produced by a memory access: `claim` must hold whenever
/// `guard` (and the current path condition) does.
struct MemCheck {
  TermId guard;
  TermId claim;  // ult(index, const length)
};

inline constexpr std::size_t kDefaultRefMuxCap = 16;

class Heap {
 public:
  GuardedRef alloc(TermTable& tt, AllocId id, const Sort& sort, TermId init);
  TermId read(TermTable& tt, const GuardedRef& r, std::vector<MemCheck>& checks) const;
  void write(TermTable& tt, const GuardedRef& r, TermId v, std::vector<MemCheck>& checks);
  void kill(AllocId id);

  const std::map<AllocId, Allocation>& allocations() const { return allocs_; }
  std::map<AllocId, Allocation>& allocations() { return allocs_; }

  /// `@<alloc id> : <sort> = %<term id>` per allocation, ascending id.
  std::string dump() const;

 private:
  const Allocation& live_alloc(AllocId id) const;
  std::map<AllocId, Allocation> allocs_;
};

/// Element `i` of an array term: the element itself for a constant index,
/// otherwise an ite chain over the elements with the last as default.
TermId select_element(TermTable& tt, TermId array, TermId index);
/// The bounds claim ult(index, len); constant true when every value of the
/// index width is in range.
TermId bounds_claim(TermTable& tt, TermId index, std::uint64_t length);

GuardedRef project(TermTable& tt, const GuardedRef& r, const PathStep& step);
GuardedRef mux_refs(TermTable& tt, TermId c, const GuardedRef& a, const GuardedRef& b,
                    std::size_t cap = kDefaultRefMuxCap, const std::string& where = "");

/// Allocation-wise merge: allocations in both heaps get ite(c, then, else)
/// contents; allocations in only one are kept as they are.
Heap merge_heaps(TermTable& tt, TermId c, const Heap& then_heap, const Heap& else_heap);

}  // namespace cruxlite
