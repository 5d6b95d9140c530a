#include "cruxlite/memory.hpp"

#include <sstream>

#include "cruxlite/error.hpp"

namespace cruxlite {

TermId bounds_claim(TermTable& tt, TermId index, std::uint64_t length) {
  unsigned w = tt.sort(index).width();
  if (w < 64 && (std::uint64_t{1} << w) <= length) return tt.true_term();
  return tt.mk(Op::BvULt, {index, tt.bv_const(length, w)});
}

TermId select_element(TermTable& tt, TermId array, TermId index) {
  Sort s = tt.sort(array);
  if (s.kind() != SortKind::Array || s.length() == 0) throw SortError("select_element: not a nonempty array");
  if (tt.const_bits(index)) return tt.mk(Op::ArrayGet, {array, index});
  std::vector<TermId> elems = tt.explode(array);
  unsigned w = tt.sort(index).width();
  std::size_t n = elems.size();
  if (w < 64 && (std::uint64_t{1} << w) < n) n = static_cast<std::size_t>(std::uint64_t{1} << w);
  TermId acc = elems[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    acc = tt.mk_ite(tt.mk_eq(index, tt.bv_const(k, w)), elems[k], acc);
  }
  return acc;
}

namespace {

Sort step_sort(const Sort& s, const PathStep& st) {
  switch (st.kind) {
    case PathStep::Kind::Field:
      if ((s.kind() != SortKind::Tuple && s.kind() != SortKind::Record) || st.index >= s.members().size()) {
        throw SortError("field selector " + std::to_string(st.index) + " invalid for " + s.str());
      }
      return s.members()[st.index];
    case PathStep::Kind::Arm:
      if (s.kind() != SortKind::Variant || st.index >= s.members().size()) {
        throw SortError("arm selector " + std::to_string(st.index) + " invalid for " + s.str());
      }
      return s.members()[st.index];
    case PathStep::Kind::Index:
      if (s.kind() != SortKind::Array || s.length() == 0) throw SortError("index selector invalid for " + s.str());
      return s.elem();
  }
  throw SortError("bad selector");
}

TermId read_path(TermTable& tt, TermId cur, const std::vector<PathStep>& path, std::size_t pos, TermId guard,
                 std::vector<MemCheck>& checks) {
  for (; pos < path.size(); ++pos) {
    const PathStep& st = path[pos];
    switch (st.kind) {
      case PathStep::Kind::Field: cur = tt.member(cur, st.index); break;
      case PathStep::Kind::Arm: cur = tt.mk(Op::VariantGet, {cur}, st.index); break;
      case PathStep::Kind::Index: {
        std::uint64_t len = tt.sort(cur).length();
        checks.push_back({guard, bounds_claim(tt, st.term, len)});
        cur = select_element(tt, cur, st.term);
        break;
      }
    }
  }
  return cur;
}

TermId write_path(TermTable& tt, TermId cur, const std::vector<PathStep>& path, std::size_t pos, TermId v,
                  TermId guard, std::vector<MemCheck>& checks) {
  if (tt.is_false(guard)) return cur;
  if (pos == path.size()) return tt.mk_ite(guard, v, cur);
  const PathStep& st = path[pos];
  const Sort s = tt.sort(cur);
  switch (st.kind) {
    case PathStep::Kind::Field: {
      auto ms = tt.explode(cur);
      ms[st.index] = write_path(tt, ms[st.index], path, pos + 1, v, guard, checks);
      return tt.rebuild(s, std::move(ms));
    }
    case PathStep::Kind::Arm: {
      TermId payload = tt.mk(Op::VariantGet, {cur}, st.index);
      TermId np = write_path(tt, payload, path, pos + 1, v, guard, checks);
      TermId active = tt.mk_eq(tt.mk(Op::VariantTag, {cur}), tt.bv_const(st.index, kVariantTagWidth));
      return tt.mk_ite(active, tt.mk_variant(s, st.index, np), cur);
    }
    case PathStep::Kind::Index: {
      std::uint64_t len = s.length();
      checks.push_back({guard, bounds_claim(tt, st.term, len)});
      auto elems = tt.explode(cur);
      unsigned w = tt.sort(st.term).width();
      if (auto c = tt.const_bits(st.term)) {
        if (*c < elems.size()) {
          auto k = static_cast<std::size_t>(*c);
          elems[k] = write_path(tt, elems[k], path, pos + 1, v, guard, checks);
        }
      } else {
        std::size_t n = elems.size();
        if (w < 64 && (std::uint64_t{1} << w) < n) n = static_cast<std::size_t>(std::uint64_t{1} << w);
        for (std::size_t k = 0; k < n; ++k) {
          TermId g = tt.mk_and(guard, tt.mk_eq(st.term, tt.bv_const(k, w)));
          // Nested bounds checks only matter under this element's guard.
          elems[k] = write_path(tt, elems[k], path, pos + 1, v, g, checks);
        }
      }
      return tt.rebuild(s, std::move(elems));
    }
  }
  return cur;
}

}  // namespace

GuardedRef Heap::alloc(TermTable& tt, AllocId id, const Sort& sort, TermId init) {
  if (!(tt.sort(init) == sort)) throw SortError("alloc: initial value sort " + tt.sort(init).str() + " is not " + sort.str());
  if (allocs_.count(id)) throw EngineError("alloc: allocation id reused");
  allocs_[id] = Allocation{sort, init, true};
  GuardedRef r;
  r.pointee = sort;
  r.alts.push_back(RefAlt{tt.true_term(), id, {}});
  return r;
}

const Allocation& Heap::live_alloc(AllocId id) const {
  auto it = allocs_.find(id);
  if (it == allocs_.end()) throw EngineError("access to unknown allocation @" + std::to_string(id));
  if (!it->second.live) throw EngineError("access to dead allocation @" + std::to_string(id));
  return it->second;
}

TermId Heap::read(TermTable& tt, const GuardedRef& r, std::vector<MemCheck>& checks) const {
  if (r.alts.empty()) throw EngineError("read through an empty reference");
  std::vector<TermId> vals;
  for (const auto& alt : r.alts) {
    const Allocation& a = live_alloc(alt.alloc);
    vals.push_back(read_path(tt, a.contents, alt.path, 0, alt.guard, checks));
  }
  TermId acc = vals.back();
  for (std::size_t i = r.alts.size() - 1; i-- > 0;) acc = tt.mk_ite(r.alts[i].guard, vals[i], acc);
  return acc;
}

void Heap::write(TermTable& tt, const GuardedRef& r, TermId v, std::vector<MemCheck>& checks) {
  if (!(tt.sort(v) == r.pointee)) throw SortError("write of " + tt.sort(v).str() + " through ref<" + r.pointee.str() + ">");
  for (const auto& alt : r.alts) {
    live_alloc(alt.alloc);
    Allocation& a = allocs_.at(alt.alloc);
    a.contents = write_path(tt, a.contents, alt.path, 0, v, alt.guard, checks);
  }
}

void Heap::kill(AllocId id) {
  auto it = allocs_.find(id);
  if (it != allocs_.end()) it->second.live = false;
}

std::string Heap::dump() const {
  std::ostringstream os;
  for (const auto& [id, a] : allocs_) {
    os << '@' << id << " : " << a.sort.str() << " = %" << a.contents.index;
    if (!a.live) os << " (dead)";
    os << '\n';
  }
  return os.str();
}

GuardedRef project(TermTable&, const GuardedRef& r, const PathStep& step) {
  GuardedRef out;
  out.pointee = step_sort(r.pointee, step);
  out.alts = r.alts;
  for (auto& a : out.alts) a.path.push_back(step);
  return out;
}

namespace {

// Same allocation and selector shape; index terms may differ if their sorts
// agree (they are then muxed).
bool same_shape(const TermTable& tt, const RefAlt& x, const RefAlt& y) {
  if (x.alloc != y.alloc || x.path.size() != y.path.size()) return false;
  for (std::size_t i = 0; i < x.path.size(); ++i) {
    const auto& a = x.path[i];
    const auto& b = y.path[i];
    if (a.kind != b.kind) return false;
    if (a.kind != PathStep::Kind::Index && a.index != b.index) return false;
    if (a.kind == PathStep::Kind::Index && !(tt.sort(a.term) == tt.sort(b.term))) return false;
  }
  return true;
}

}  // namespace

GuardedRef mux_refs(TermTable& tt, TermId c, const GuardedRef& a, const GuardedRef& b, std::size_t cap,
                    const std::string& where) {
  if (!(a.pointee == b.pointee)) {
    throw EngineError("cannot merge references to " + a.pointee.str() + " and " + b.pointee.str());
  }
  if (tt.is_true(c)) return a;
  if (tt.is_false(c)) return b;
  GuardedRef out;
  out.pointee = a.pointee;
  std::vector<bool> used(b.alts.size(), false);
  TermId nc = tt.mk_not(c);
  for (const auto& x : a.alts) {
    RefAlt m = x;
    bool paired = false;
    for (std::size_t j = 0; j < b.alts.size() && !paired; ++j) {
      if (used[j] || !same_shape(tt, x, b.alts[j])) continue;
      used[j] = true;
      paired = true;
      const RefAlt& y = b.alts[j];
      m.guard = tt.mk_ite(c, x.guard, y.guard);
      for (std::size_t i = 0; i < m.path.size(); ++i) {
        if (m.path[i].kind == PathStep::Kind::Index) m.path[i].term = tt.mk_ite(c, x.path[i].term, y.path[i].term);
      }
    }
    if (!paired) m.guard = tt.mk_and(c, x.guard);
    if (!tt.is_false(m.guard)) out.alts.push_back(std::move(m));
  }
  for (std::size_t j = 0; j < b.alts.size(); ++j) {
    if (used[j]) continue;
    RefAlt m = b.alts[j];
    m.guard = tt.mk_and(nc, m.guard);
    if (!tt.is_false(m.guard)) out.alts.push_back(std::move(m));
  }
  if (out.alts.size() > cap) {
    throw EngineError("reference mux explosion: " + std::to_string(out.alts.size()) + " alternatives exceed " +
                      std::to_string(cap) + (where.empty() ? "" : " at " + where));
  }
  if (out.alts.empty()) out = a;
  return out;
}

Heap merge_heaps(TermTable& tt, TermId c, const Heap& then_heap, const Heap& else_heap) {
  Heap out = then_heap;
  auto& dst = out.allocations();
  for (const auto& [id, e] : else_heap.allocations()) {
    auto it = dst.find(id);
    if (it == dst.end()) {
      dst[id] = e;
      continue;
    }
    Allocation& t = it->second;
    t.contents = tt.mk_ite(c, t.contents, e.contents);
    t.live = t.live && e.live;
  }
  return out;
}

}  // namespace cruxlite
