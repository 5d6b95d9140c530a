#include "cruxlite/blast.hpp"

#include <cstdlib>

#include "cruxlite/error.hpp"

namespace cruxlite {

std::size_t Blaster::GateHash::operator()(const GateKey& g) const {
  std::size_t h = 1469598103934665603ull;
  for (int x : g.k) h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(x))) * 1099511628211ull;
  return h;
}

Blaster::Blaster(const TermTable& tt) : tt_(tt) {
  int t = cnf_.new_var();
  cnf_.add({t});
}

int Blaster::mk_and(int a, int b) {
  const int T = true_lit(), F = false_lit();
  if (a == F || b == F) return F;
  if (a == T) return b;
  if (b == T) return a;
  if (a == b) return a;
  if (a == -b) return F;
  if (a > b) std::swap(a, b);
  GateKey key{{0, a, b, 0}};
  auto it = gates_.find(key);
  if (it != gates_.end()) return it->second;
  int o = cnf_.new_var();
  cnf_.add({-o, a});
  cnf_.add({-o, b});
  cnf_.add({o, -a, -b});
  gates_.emplace(key, o);
  return o;
}

int Blaster::mk_xor(int a, int b) {
  const int T = true_lit(), F = false_lit();
  if (a == F) return b;
  if (b == F) return a;
  if (a == T) return -b;
  if (b == T) return -a;
  if (a == b) return F;
  if (a == -b) return T;
  bool flip = (a < 0) != (b < 0);
  a = std::abs(a);
  b = std::abs(b);
  if (a > b) std::swap(a, b);
  GateKey key{{1, a, b, 0}};
  int o;
  auto it = gates_.find(key);
  if (it != gates_.end()) {
    o = it->second;
  } else {
    o = cnf_.new_var();
    cnf_.add({-o, a, b});
    cnf_.add({-o, -a, -b});
    cnf_.add({o, -a, b});
    cnf_.add({o, a, -b});
    gates_.emplace(key, o);
  }
  return flip ? -o : o;
}

int Blaster::mk_ite(int c, int t, int e) {
  const int T = true_lit(), F = false_lit();
  if (c == T) return t;
  if (c == F) return e;
  if (t == e) return t;
  if (t == -e) return mk_xor(c, e);
  if (t == T || c == t) return mk_or(c, e);
  if (t == F || c == -t) return mk_and(-c, e);
  if (e == F || c == e) return mk_and(c, t);
  if (e == T || c == -e) return mk_or(-c, t);
  if (c < 0) {
    c = -c;
    std::swap(t, e);
  }
  GateKey key{{2, c, t, e}};
  auto it = gates_.find(key);
  if (it != gates_.end()) return it->second;
  int o = cnf_.new_var();
  cnf_.add({-c, -t, o});
  cnf_.add({-c, t, -o});
  cnf_.add({c, -e, o});
  cnf_.add({c, e, -o});
  cnf_.add({-t, -e, o});
  cnf_.add({t, e, -o});
  gates_.emplace(key, o);
  return o;
}

int Blaster::mk_and_all(const Bits& xs) {
  if (xs.empty()) return true_lit();
  Bits cur = xs;
  while (cur.size() > 1) {
    Bits next;
    for (std::size_t i = 0; i + 1 < cur.size(); i += 2) next.push_back(mk_and(cur[i], cur[i + 1]));
    if (cur.size() % 2) next.push_back(cur.back());
    cur = std::move(next);
  }
  return cur[0];
}

int Blaster::mk_or_all(const Bits& xs) {
  Bits n;
  for (int x : xs) n.push_back(-x);
  return -mk_and_all(n);
}

Bits Blaster::constant(u128 v, unsigned width) const {
  Bits out(width);
  for (unsigned i = 0; i < width; ++i) out[i] = ((v >> i) & 1) ? true_lit() : false_lit();
  return out;
}

Bits Blaster::add(const Bits& a, const Bits& b, int carry) {
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    int x = mk_xor(a[i], b[i]);
    out[i] = mk_xor(x, carry);
    if (i + 1 < a.size()) carry = mk_ite(x, carry, a[i]);
  }
  return out;
}

Bits Blaster::sub(const Bits& a, const Bits& b) {
  Bits nb(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) nb[i] = -b[i];
  return add(a, nb, true_lit());
}

Bits Blaster::mul(const Bits& a, const Bits& b) {
  std::size_t w = a.size();
  Bits acc = constant(0, static_cast<unsigned>(w));
  for (std::size_t i = 0; i < w; ++i) {
    if (b[i] == false_lit()) continue;
    Bits pp(w, false_lit());
    for (std::size_t j = i; j < w; ++j) pp[j] = mk_and(a[j - i], b[i]);
    acc = add(acc, pp, false_lit());
  }
  return acc;
}

void Blaster::divmod(const Bits& a, const Bits& b, Bits& quot, Bits& rem) {
  std::size_t w = a.size();
  quot.assign(w, false_lit());
  rem = constant(0, static_cast<unsigned>(w));
  Bits bw = b;
  bw.push_back(false_lit());
  for (std::size_t i = w; i-- > 0;) {
    Bits shifted(w + 1);
    shifted[0] = a[i];
    for (std::size_t k = 0; k < w; ++k) shifted[k + 1] = rem[k];
    int ge = -ult(shifted, bw);
    quot[i] = ge;
    Bits diff = sub(shifted, bw);
    Bits next = ite(ge, diff, shifted);
    next.pop_back();
    rem = std::move(next);
  }
}

Bits Blaster::shl(const Bits& a, const Bits& s) {
  std::size_t w = a.size();
  Bits cur = a;
  Bits overflow;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j >= 64 || (std::uint64_t{1} << j) >= w) {
      overflow.push_back(s[j]);
      continue;
    }
    std::size_t k = std::size_t{1} << j;
    Bits shifted(w, false_lit());
    for (std::size_t i = k; i < w; ++i) shifted[i] = cur[i - k];
    cur = ite(s[j], shifted, cur);
  }
  return ite(mk_or_all(overflow), constant(0, static_cast<unsigned>(w)), cur);
}

Bits Blaster::lshr(const Bits& a, const Bits& s) {
  std::size_t w = a.size();
  Bits cur = a;
  Bits overflow;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j >= 64 || (std::uint64_t{1} << j) >= w) {
      overflow.push_back(s[j]);
      continue;
    }
    std::size_t k = std::size_t{1} << j;
    Bits shifted(w, false_lit());
    for (std::size_t i = 0; i + k < w; ++i) shifted[i] = cur[i + k];
    cur = ite(s[j], shifted, cur);
  }
  return ite(mk_or_all(overflow), constant(0, static_cast<unsigned>(w)), cur);
}

int Blaster::ult(const Bits& a, const Bits& b) {
  int lt = false_lit();
  for (std::size_t i = 0; i < a.size(); ++i) lt = mk_ite(mk_xor(a[i], b[i]), b[i], lt);
  return lt;
}

int Blaster::slt(const Bits& a, const Bits& b) {
  Bits x = a, y = b;
  x.back() = -x.back();
  y.back() = -y.back();
  return ult(x, y);
}

int Blaster::eq(const Bits& a, const Bits& b) {
  Bits same(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) same[i] = -mk_xor(a[i], b[i]);
  return mk_and_all(same);
}

int Blaster::eq_const(const Bits& a, u128 v) { return eq(a, constant(v, static_cast<unsigned>(a.size()))); }

Bits Blaster::ite(int c, const Bits& t, const Bits& e) {
  Bits out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = mk_ite(c, t[i], e[i]);
  return out;
}

std::uint64_t Blaster::member_offset(const Sort& s, std::size_t i) const {
  std::uint64_t off = s.kind() == SortKind::Variant ? kVariantTagWidth : 0;
  if (s.kind() == SortKind::Array) return i * s.elem().flat_bits();
  for (std::size_t k = 0; k < i; ++k) off += s.members()[k].flat_bits();
  return off;
}

const Bits& Blaster::bits(TermId root) {
  if (memo_.size() < tt_.size()) {
    memo_.resize(tt_.size());
    done_.resize(tt_.size(), 0);
  }
  if (done_[root.index]) return memo_[root.index];
  std::vector<std::pair<TermId, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [t, expanded] = stack.back();
    stack.pop_back();
    if (done_[t.index]) continue;
    if (expanded) {
      blast_node(t);
      done_[t.index] = 1;
      continue;
    }
    stack.push_back({t, true});
    for (TermId c : tt_.node(t).children) {
      if (!done_[c.index]) stack.push_back({c, false});
    }
  }
  return memo_[root.index];
}

int Blaster::lit(TermId t) {
  const Bits& b = bits(t);
  if (!tt_.sort(t).is_bool()) throw EngineError("blast: expected a bool term");
  return b[0];
}

void Blaster::blast_node(TermId t) {
  const TermNode& n = tt_.node(t);
  auto ch = [&](std::size_t i) -> const Bits& { return memo_[n.children[i].index]; };
  auto slice = [](const Bits& b, std::uint64_t off, std::uint64_t len) {
    return Bits(b.begin() + static_cast<std::ptrdiff_t>(off), b.begin() + static_cast<std::ptrdiff_t>(off + len));
  };
  if (n.sort.contains_reference()) throw EngineError("blast: reference sort reached the solver");
  Bits out;
  switch (n.op) {
    case Op::Const: out = constant(n.param, n.sort.is_bool() ? 1 : n.sort.width()); break;
    case Op::UnitConst: break;
    case Op::Symbol: {
      unsigned w = n.sort.is_bool() ? 1 : n.sort.width();
      for (unsigned i = 0; i < w; ++i) out.push_back(cnf_.new_var());
      symbols_[n.ordinal] = out;
      symbol_sorts_.emplace(n.ordinal, n.sort);
      break;
    }
    case Op::Not: out = {-ch(0)[0]}; break;
    case Op::And: out = {mk_and(ch(0)[0], ch(1)[0])}; break;
    case Op::Or: out = {mk_or(ch(0)[0], ch(1)[0])}; break;
    case Op::Xor: out = {mk_xor(ch(0)[0], ch(1)[0])}; break;
    case Op::Implies: out = {mk_or(-ch(0)[0], ch(1)[0])}; break;
    case Op::Ite: out = ite(ch(0)[0], ch(1), ch(2)); break;
    case Op::Eq: out = {eq(ch(0), ch(1))}; break;
    case Op::BvAdd: out = add(ch(0), ch(1), false_lit()); break;
    case Op::BvSub: out = sub(ch(0), ch(1)); break;
    case Op::BvMul: out = mul(ch(0), ch(1)); break;
    case Op::BvUDiv:
    case Op::BvURem: {
      Bits q, r;
      divmod(ch(0), ch(1), q, r);
      if (n.op == Op::BvUDiv) {
        out = q;
      } else {
        out = ite(eq_const(ch(1), 0), constant(0, n.sort.width()), r);
      }
      break;
    }
    case Op::BvAnd:
    case Op::BvOr:
    case Op::BvXor: {
      const Bits& a = ch(0);
      const Bits& b = ch(1);
      out.resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = n.op == Op::BvAnd ? mk_and(a[i], b[i]) : n.op == Op::BvOr ? mk_or(a[i], b[i]) : mk_xor(a[i], b[i]);
      }
      break;
    }
    case Op::BvNot:
      for (int x : ch(0)) out.push_back(-x);
      break;
    case Op::BvNeg: out = sub(constant(0, n.sort.width()), ch(0)); break;
    case Op::BvShl: out = shl(ch(0), ch(1)); break;
    case Op::BvLShr: out = lshr(ch(0), ch(1)); break;
    case Op::BvULt: out = {ult(ch(0), ch(1))}; break;
    case Op::BvULe: out = {-ult(ch(1), ch(0))}; break;
    case Op::BvUGt: out = {ult(ch(1), ch(0))}; break;
    case Op::BvUGe: out = {-ult(ch(0), ch(1))}; break;
    case Op::BvSLt: out = {slt(ch(0), ch(1))}; break;
    case Op::BvSLe: out = {-slt(ch(1), ch(0))}; break;
    case Op::BvZeroExtend:
      out = ch(0);
      out.resize(n.sort.width(), false_lit());
      break;
    case Op::BvTruncate: out = slice(ch(0), 0, n.sort.width()); break;
    case Op::BvConcat:
      out = ch(1);
      out.insert(out.end(), ch(0).begin(), ch(0).end());
      break;
    case Op::MkTuple:
    case Op::MkRecord:
    case Op::MkArray:
      for (std::size_t i = 0; i < n.children.size(); ++i) out.insert(out.end(), ch(i).begin(), ch(i).end());
      break;
    case Op::TupleGet:
    case Op::RecordGet: {
      Sort s = tt_.sort(n.children[0]);
      auto i = static_cast<std::size_t>(n.param);
      out = slice(ch(0), member_offset(s, i), s.members()[i].flat_bits());
      break;
    }
    case Op::ArrayGet:
    case Op::ArraySet: {
      Sort s = tt_.sort(n.children[0]);
      std::uint64_t len = s.length();
      std::uint64_t ew = s.elem().flat_bits();
      const Bits& arr = ch(0);
      const Bits& idx = ch(1);
      std::uint64_t reach = len;
      if (idx.size() < 64 && (std::uint64_t{1} << idx.size()) < len) reach = std::uint64_t{1} << idx.size();
      if (n.op == Op::ArrayGet) {
        out = slice(arr, (reach - 1) * ew, ew);
        for (std::uint64_t k = reach - 1; k-- > 0;) out = ite(eq_const(idx, k), slice(arr, k * ew, ew), out);
      } else {
        out = arr;
        for (std::uint64_t k = 0; k < reach; ++k) {
          int hit = eq_const(idx, k);
          Bits e = ite(hit, ch(2), slice(arr, k * ew, ew));
          std::copy(e.begin(), e.end(), out.begin() + static_cast<std::ptrdiff_t>(k * ew));
        }
      }
      break;
    }
    case Op::MkVariant: {
      auto arm = static_cast<std::size_t>(n.param);
      out = constant(arm, kVariantTagWidth);
      for (std::size_t k = 0; k < n.sort.members().size(); ++k) {
        if (k == arm) {
          out.insert(out.end(), ch(0).begin(), ch(0).end());
        } else {
          out.resize(out.size() + n.sort.members()[k].flat_bits(), false_lit());
        }
      }
      break;
    }
    case Op::VariantTag: out = slice(ch(0), 0, kVariantTagWidth); break;
    case Op::VariantGet: {
      Sort s = tt_.sort(n.children[0]);
      auto i = static_cast<std::size_t>(n.param);
      out = slice(ch(0), member_offset(s, i), s.members()[i].flat_bits());
      break;
    }
  }
  memo_[t.index] = std::move(out);
}

Env Blaster::decode(const std::vector<bool>& model) const {
  Env env;
  auto val = [&](int l) {
    bool b = model.at(static_cast<std::size_t>(std::abs(l)));
    return l > 0 ? b : !b;
  };
  for (const auto& [ord, bs] : symbols_) {
    const Sort& s = symbol_sorts_.at(ord);
    if (s.is_bool()) {
      env[ord] = Value::boolean(val(bs[0]));
    } else {
      u128 v = 0;
      for (std::size_t i = 0; i < bs.size(); ++i) {
        if (val(bs[i])) v |= u128{1} << i;
      }
      env[ord] = Value::bitvec(v, s.width());
    }
  }
  return env;
}

}  // namespace cruxlite
