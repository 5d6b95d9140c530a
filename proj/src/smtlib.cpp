#include <sstream>
#include <unordered_set>

#include "cruxlite/error.hpp"
#include "cruxlite/solver.hpp"

namespace cruxlite {

namespace {

// Scalar components of a sort in flattening order.
void leaf_sorts(const Sort& s, std::vector<Sort>& out) {
  switch (s.kind()) {
    case SortKind::Bool:
    case SortKind::BitVec: out.push_back(s); break;
    case SortKind::Unit: break;
    case SortKind::Array:
      for (std::uint64_t i = 0; i < s.length(); ++i) leaf_sorts(s.elem(), out);
      break;
    case SortKind::Tuple:
    case SortKind::Record:
      for (const auto& m : s.members()) leaf_sorts(m, out);
      break;
    case SortKind::Variant:
      out.push_back(Sort::bitvec(kVariantTagWidth));
      for (const auto& m : s.members()) leaf_sorts(m, out);
      break;
    case SortKind::Reference: throw EngineError("smtlib: reference sort reached the solver");
  }
}

std::size_t leaf_count(const Sort& s) {
  std::vector<Sort> v;
  leaf_sorts(s, v);
  return v.size();
}

std::string smt_sort(const Sort& s) {
  if (s.is_bool()) return "Bool";
  return "(_ BitVec " + std::to_string(s.width()) + ")";
}

std::string smt_const(u128 v, const Sort& s) {
  if (s.is_bool()) return v ? "true" : "false";
  unsigned w = s.width();
  if (w % 4 == 0) return "#x" + u128_to_hex(v, w);
  std::string b = "#b";
  for (unsigned i = w; i-- > 0;) b += ((v >> i) & 1) ? '1' : '0';
  return b;
}

std::string quote_symbol(const std::string& name, std::uint32_t ord) {
  std::string s;
  for (char c : name) s += (c == '|' || c == '\\') ? '_' : c;
  return "|" + s + "!" + std::to_string(ord) + "|";
}

class Emitter {
 public:
  explicit Emitter(const TermTable& tt) : tt_(tt) {}

  std::string run(TermId query, bool request_model) {
    std::vector<TermId> order;
    topo(query, order);
    for (TermId t : order) emit_node(t);
    std::vector<TermId> syms = tt_.symbols_in(query);
    std::ostringstream os;
    os << "(set-logic QF_BV)\n";
    if (request_model) os << "(set-option :produce-models true)\n";
    for (TermId s : syms) {
      const auto& n = tt_.node(s);
      os << "(declare-const " << quote_symbol(n.name, n.ordinal) << ' ' << smt_sort(n.sort) << ")\n";
    }
    os << defs_.str();
    for (TermId c : tt_.conjuncts(query)) os << "(assert " << leaves_.at(c.index)[0] << ")\n";
    os << "(check-sat)\n";
    if (request_model) os << "(get-model)\n";
    return os.str();
  }

 private:
  void topo(TermId root, std::vector<TermId>& order) {
    std::vector<std::pair<TermId, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [t, expanded] = stack.back();
      stack.pop_back();
      if (visited_.count(t.index) && !expanded) continue;
      if (expanded) {
        order.push_back(t);
        continue;
      }
      visited_.insert(t.index);
      stack.push_back({t, true});
      const auto& ch = tt_.node(t).children;
      for (std::size_t i = ch.size(); i-- > 0;) {
        if (!visited_.count(ch[i].index)) stack.push_back({ch[i], false});
      }
    }
  }

  // Name a composite leaf expression so shared subterms print once.
  std::string define(TermId t, std::size_t leaf, const Sort& s, const std::string& expr) {
    std::string name = "t" + std::to_string(t.index);
    if (leaf != SIZE_MAX) name += "_" + std::to_string(leaf);
    defs_ << "(define-fun " << name << " () " << smt_sort(s) << ' ' << expr << ")\n";
    return name;
  }

  std::string eq_leaves(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty()) return "true";
    if (a.size() == 1) return "(= " + a[0] + ' ' + b[0] + ")";
    std::string s = "(and";
    for (std::size_t i = 0; i < a.size(); ++i) s += " (= " + a[i] + ' ' + b[i] + ")";
    return s + ")";
  }

  void emit_node(TermId t) {
    const TermNode& n = tt_.node(t);
    auto ch = [&](std::size_t i) -> const std::vector<std::string>& { return leaves_.at(n.children[i].index); };
    auto one = [&](std::size_t i) -> const std::string& { return ch(i).at(0); };
    auto scalar = [&](const std::string& expr) {
      leaves_[t.index] = {define(t, SIZE_MAX, n.sort, expr)};
    };
    auto bin = [&](const char* op) { scalar(std::string("(") + op + ' ' + one(0) + ' ' + one(1) + ")"); };
    std::vector<std::string> out;
    switch (n.op) {
      case Op::Const: leaves_[t.index] = {smt_const(n.param, n.sort)}; return;
      case Op::Symbol: leaves_[t.index] = {quote_symbol(n.name, n.ordinal)}; return;
      case Op::UnitConst: leaves_[t.index] = {}; return;
      case Op::Not: scalar("(not " + one(0) + ")"); return;
      case Op::And: bin("and"); return;
      case Op::Or: bin("or"); return;
      case Op::Xor: bin("xor"); return;
      case Op::Implies: bin("=>"); return;
      case Op::Eq: scalar(eq_leaves(ch(0), ch(1))); return;
      case Op::BvAdd: bin("bvadd"); return;
      case Op::BvSub: bin("bvsub"); return;
      case Op::BvMul: bin("bvmul"); return;
      case Op::BvUDiv: bin("bvudiv"); return;
      case Op::BvURem: {
        std::string zero = smt_const(0, n.sort);
        scalar("(ite (= " + one(1) + ' ' + zero + ") " + zero + " (bvurem " + one(0) + ' ' + one(1) + "))");
        return;
      }
      case Op::BvAnd: bin("bvand"); return;
      case Op::BvOr: bin("bvor"); return;
      case Op::BvXor: bin("bvxor"); return;
      case Op::BvNot: scalar("(bvnot " + one(0) + ")"); return;
      case Op::BvNeg: scalar("(bvneg " + one(0) + ")"); return;
      case Op::BvShl: bin("bvshl"); return;
      case Op::BvLShr: bin("bvlshr"); return;
      case Op::BvULt: bin("bvult"); return;
      case Op::BvULe: bin("bvule"); return;
      case Op::BvUGt: bin("bvugt"); return;
      case Op::BvUGe: bin("bvuge"); return;
      case Op::BvSLt: bin("bvslt"); return;
      case Op::BvSLe: bin("bvsle"); return;
      case Op::BvZeroExtend: {
        unsigned k = n.sort.width() - tt_.sort(n.children[0]).width();
        scalar("((_ zero_extend " + std::to_string(k) + ") " + one(0) + ")");
        return;
      }
      case Op::BvTruncate:
        scalar("((_ extract " + std::to_string(n.sort.width() - 1) + " 0) " + one(0) + ")");
        return;
      case Op::BvConcat: bin("concat"); return;
      case Op::Ite: {
        std::vector<Sort> ls;
        leaf_sorts(n.sort, ls);
        for (std::size_t i = 0; i < ls.size(); ++i) {
          std::string e = "(ite " + one(0) + ' ' + ch(1)[i] + ' ' + ch(2)[i] + ")";
          out.push_back(define(t, ls.size() == 1 && n.sort.is_scalar() ? SIZE_MAX : i, ls[i], e));
        }
        break;
      }
      case Op::MkTuple:
      case Op::MkRecord:
      case Op::MkArray:
        for (std::size_t i = 0; i < n.children.size(); ++i) out.insert(out.end(), ch(i).begin(), ch(i).end());
        break;
      case Op::TupleGet:
      case Op::RecordGet:
      case Op::VariantGet: {
        Sort s = tt_.sort(n.children[0]);
        auto m = static_cast<std::size_t>(n.param);
        std::size_t off = s.kind() == SortKind::Variant ? 1 : 0;
        for (std::size_t k = 0; k < m; ++k) off += leaf_count(s.members()[k]);
        std::size_t len = leaf_count(s.members()[m]);
        out.assign(ch(0).begin() + static_cast<std::ptrdiff_t>(off),
                   ch(0).begin() + static_cast<std::ptrdiff_t>(off + len));
        break;
      }
      case Op::VariantTag: out = {ch(0).at(0)}; break;
      case Op::MkVariant: {
        auto arm = static_cast<std::size_t>(n.param);
        out.push_back(smt_const(arm, Sort::bitvec(kVariantTagWidth)));
        for (std::size_t k = 0; k < n.sort.members().size(); ++k) {
          if (k == arm) {
            out.insert(out.end(), ch(0).begin(), ch(0).end());
          } else {
            std::vector<Sort> ls;
            leaf_sorts(n.sort.members()[k], ls);
            for (const auto& s : ls) out.push_back(smt_const(0, s));
          }
        }
        break;
      }
      case Op::ArrayGet:
      case Op::ArraySet: {
        Sort s = tt_.sort(n.children[0]);
        std::size_t ew = leaf_count(s.elem());
        std::vector<Sort> es;
        leaf_sorts(s.elem(), es);
        std::uint64_t len = s.length();
        const auto& idx = one(1);
        unsigned iw = tt_.sort(n.children[1]).width();
        std::uint64_t reach = len;
        if (iw < 64 && (std::uint64_t{1} << iw) < len) reach = std::uint64_t{1} << iw;
        auto elem = [&](std::uint64_t k, std::size_t j) { return ch(0)[k * ew + j]; };
        auto hit = [&](std::uint64_t k) { return "(= " + idx + ' ' + smt_const(k, Sort::bitvec(iw)) + ")"; };
        if (n.op == Op::ArrayGet) {
          for (std::size_t j = 0; j < ew; ++j) {
            std::string e = elem(reach - 1, j);
            for (std::uint64_t k = reach - 1; k-- > 0;) e = "(ite " + hit(k) + ' ' + elem(k, j) + ' ' + e + ")";
            out.push_back(reach == 1 ? e : define(t, j, es[j], e));
          }
        } else {
          out = ch(0);
          for (std::uint64_t k = 0; k < reach; ++k) {
            for (std::size_t j = 0; j < ew; ++j) {
              std::string e = "(ite " + hit(k) + ' ' + ch(2)[j] + ' ' + elem(k, j) + ")";
              out[k * ew + j] = define(t, k * ew + j, es[j], e);
            }
          }
        }
        break;
      }
    }
    leaves_[t.index] = std::move(out);
  }

  const TermTable& tt_;
  std::unordered_set<std::uint32_t> visited_;
  std::unordered_map<std::uint32_t, std::vector<std::string>> leaves_;
  std::ostringstream defs_;
};

}  // namespace

std::string emit_smtlib(const TermTable& tt, TermId query, bool request_model) {
  if (!tt.sort(query).is_bool()) throw EngineError("smtlib: query is not bool");
  return Emitter(tt).run(query, request_model);
}

}  // namespace cruxlite
