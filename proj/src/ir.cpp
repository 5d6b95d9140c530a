#include "cruxlite/ir.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "cruxlite/error.hpp"

namespace cruxlite {

std::string SourceSpan::str() const {
  std::string s = file.empty() ? "<input>" : file;
  return s + ":" + std::to_string(line) + ":" + std::to_string(col);
}

std::string Diagnostic::str() const { return span.str() + ": " + message; }

std::optional<BlockId> Function::find_block(const std::string& label) const {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].label == label) return static_cast<BlockId>(i);
  }
  return std::nullopt;
}

std::optional<LocalId> Function::find_local(const std::string& n) const {
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (locals[i].name == n) return static_cast<LocalId>(i);
  }
  return std::nullopt;
}

const Function* Program::find_function(const std::string& n) const {
  for (const auto& f : functions) {
    if (f.name == n) return &f;
  }
  return nullptr;
}

const SortDecl* Program::find_sort(const std::string& n) const {
  for (const auto& d : sorts) {
    if (d.sort.name() == n) return &d;
  }
  return nullptr;
}

namespace {

struct PrimKw {
  Op op;
  const char* kw;
};

constexpr PrimKw kPrims[] = {
    {Op::Not, "not"},      {Op::And, "and"},       {Op::Or, "or"},          {Op::Xor, "xor"},
    {Op::Implies, "implies"}, {Op::Ite, "ite"},    {Op::Eq, "eq"},          {Op::BvAdd, "add"},
    {Op::BvSub, "sub"},    {Op::BvMul, "mul"},     {Op::BvUDiv, "udiv"},    {Op::BvURem, "urem"},
    {Op::BvAnd, "band"},   {Op::BvOr, "bor"},      {Op::BvXor, "bxor"},     {Op::BvNot, "bnot"},
    {Op::BvNeg, "neg"},    {Op::BvShl, "shl"},     {Op::BvLShr, "lshr"},    {Op::BvULt, "ult"},
    {Op::BvULe, "ule"},    {Op::BvUGt, "ugt"},     {Op::BvUGe, "uge"},      {Op::BvSLt, "slt"},
    {Op::BvSLe, "sle"},    {Op::BvZeroExtend, "zext"}, {Op::BvTruncate, "trunc"}, {Op::BvConcat, "concat"},
};

}  // namespace

std::string_view prim_keyword(Op op) {
  for (const auto& p : kPrims) {
    if (p.op == op) return p.kw;
  }
  return op_name(op);
}

std::optional<Op> prim_from_keyword(std::string_view kw) {
  for (const auto& p : kPrims) {
    if (kw == p.kw) return p.op;
  }
  return std::nullopt;
}

bool is_override(const std::string& name) {
  return name == "rotl" || name == "rotr" || name == "umax" || name == "umin" || name == "sort";
}

std::optional<Sort> override_result(const std::string& name, const std::vector<Sort>& args) {
  if (name == "rotl" || name == "rotr" || name == "umax" || name == "umin") {
    if (args.size() == 2 && args[0].is_bv() && args[0] == args[1]) return args[0];
    return std::nullopt;
  }
  if (name == "sort") {
    if (args.size() == 1 && args[0].kind() == SortKind::Array && args[0].elem().is_bv()) return args[0];
  }
  return std::nullopt;
}

namespace {

Sort operand_sort(const Function& f, const Operand& o) {
  if (o.kind == Operand::Kind::Local) return f.locals.at(o.local).sort;
  return o.value.sort();
}

bool operand_ok(const Function& f, const Operand& o) {
  return o.kind == Operand::Kind::Const || o.local < f.locals.size();
}

}  // namespace

std::optional<Sort> rvalue_sort(const Program& p, const Function& f, const Rvalue& rv,
                                std::vector<Diagnostic>* diags) {
  auto fail = [&](const std::string& msg) -> std::optional<Sort> {
    if (diags) diags->push_back({rv.span, "in " + f.name + ": " + msg});
    return std::nullopt;
  };
  for (const auto& a : rv.args) {
    if (!operand_ok(f, a)) return fail("operand refers to an undeclared local");
  }
  std::vector<Sort> s;
  for (const auto& a : rv.args) s.push_back(operand_sort(f, a));
  auto need = [&](std::size_t n) { return s.size() == n; };
  using K = Rvalue::Kind;
  switch (rv.kind) {
    case K::Use:
      if (!need(1)) return fail("use takes one operand");
      return s[0];
    case K::Prim: {
      for (const auto& x : s) {
        if (x.contains_reference()) return fail(std::string(prim_keyword(rv.op)) + " cannot take reference operands");
      }
      // Sort-check by building the operation over placeholder symbols.
      TermTable scratch;
      std::vector<TermId> kids;
      for (const auto& x : s) kids.push_back(scratch.fresh_symbol("_", x));
      try {
        return scratch.sort(scratch.mk(rv.op, kids, rv.param));
      } catch (const SortError& e) {
        return fail(e.what());
      }
    }
    case K::Checked: {
      bool ok_op = rv.op == Op::BvAdd || rv.op == Op::BvSub || rv.op == Op::BvMul || rv.op == Op::BvUDiv ||
                   rv.op == Op::BvURem;
      if (!ok_op) return fail("checked_" + std::string(prim_keyword(rv.op)) + " is not a checked operation");
      if (!need(2) || !s[0].is_bv() || !(s[0] == s[1])) {
        return fail("checked_" + std::string(prim_keyword(rv.op)) + " needs two operands of one bit-vector sort");
      }
      if (rv.op == Op::BvMul && s[0].width() > 64) return fail("checked_mul is limited to 64-bit operands");
      return s[0];
    }
    case K::Tuple:
      for (const auto& x : s) {
        if (x.contains_reference()) return fail("references cannot be stored in aggregates");
      }
      return Sort::tuple(s);
    case K::Array: {
      if (s.empty()) return fail("array literal needs at least one element");
      for (const auto& x : s) {
        if (!(x == s[0])) return fail("array elements " + s[0].str() + " and " + x.str() + " differ");
        if (x.contains_reference()) return fail("references cannot be stored in aggregates");
      }
      return Sort::array(s[0], s.size());
    }
    case K::Record: {
      if (rv.sort.kind() != SortKind::Record) return fail("record literal needs a record sort");
      if (s.size() != rv.sort.members().size()) return fail("record " + rv.sort.str() + " field count mismatch");
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] == rv.sort.members()[i])) {
          return fail("field " + rv.sort.labels()[i] + " of " + rv.sort.str() + " expects " +
                      rv.sort.members()[i].str() + ", got " + s[i].str());
        }
      }
      return rv.sort;
    }
    case K::Variant: {
      if (rv.sort.kind() != SortKind::Variant || rv.index >= rv.sort.members().size() || !need(1)) {
        return fail("bad variant constructor");
      }
      if (!(s[0] == rv.sort.members()[rv.index])) {
        return fail("arm " + rv.sort.labels()[rv.index] + " expects " + rv.sort.members()[rv.index].str() +
                    ", got " + s[0].str());
      }
      return rv.sort;
    }
    case K::Field:
      if (!need(1) || (s[0].kind() != SortKind::Tuple && s[0].kind() != SortKind::Record) ||
          rv.index >= s[0].members().size()) {
        return fail("no field " + rv.name + " in " + (s.empty() ? std::string("?") : s[0].str()));
      }
      return s[0].members()[rv.index];
    case K::Payload:
    case K::Tag:
    case K::IsArm:
      if (!need(1) || s[0].kind() != SortKind::Variant) return fail("operand is not a variant");
      if (rv.kind == K::Tag) return Sort::bitvec(kVariantTagWidth);
      if (rv.index >= s[0].members().size()) return fail("no arm " + rv.name + " in " + s[0].str());
      if (rv.kind == K::IsArm) return Sort::boolean();
      return s[0].members()[rv.index];
    case K::Index:
      if (!need(2) || s[0].kind() != SortKind::Array || !s[1].is_bv()) return fail("index needs an array and a bit-vector");
      if (s[0].length() == 0) return fail("cannot index an empty array");
      return s[0].elem();
    case K::Update:
      if (!need(3) || s[0].kind() != SortKind::Array || !s[1].is_bv() || !(s[0].elem() == s[2])) {
        return fail("update needs an array, a bit-vector index and an element");
      }
      return s[0];
    case K::Alloc:
      if (!need(1) || !(s[0] == rv.sort)) {
        return fail("alloc of " + rv.sort.str() + " initialised with " + (s.empty() ? std::string("?") : s[0].str()));
      }
      if (rv.sort.contains_reference()) return fail("allocations cannot hold references");
      return Sort::reference(rv.sort);
    case K::Load:
      if (!need(1) || !s[0].is_ref()) return fail("load needs a reference");
      return s[0].elem();
    case K::RefField:
      if (!need(1) || !s[0].is_ref() ||
          (s[0].elem().kind() != SortKind::Tuple && s[0].elem().kind() != SortKind::Record) ||
          rv.index >= s[0].elem().members().size()) {
        return fail("reffield needs a reference to a tuple or record with field " + rv.name);
      }
      return Sort::reference(s[0].elem().members()[rv.index]);
    case K::RefIndex:
      if (!need(2) || !s[0].is_ref() || s[0].elem().kind() != SortKind::Array || !s[1].is_bv()) {
        return fail("refindex needs a reference to an array and a bit-vector index");
      }
      return Sort::reference(s[0].elem().elem());
    case K::RefPayload:
      if (!need(1) || !s[0].is_ref() || s[0].elem().kind() != SortKind::Variant ||
          rv.index >= s[0].elem().members().size()) {
        return fail("refpayload needs a reference to a variant with arm " + rv.name);
      }
      return Sort::reference(s[0].elem().members()[rv.index]);
    case K::Call: {
      if (const Function* g = p.find_function(rv.name)) {
        if (g->is_test || g->spec_for) return fail("cannot call test or spec function " + rv.name);
        if (g->num_params != s.size()) {
          return fail("call to " + rv.name + " with " + std::to_string(s.size()) + " arguments, expected " +
                      std::to_string(g->num_params));
        }
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (!(s[i] == g->locals[i].sort)) {
            return fail("argument " + std::to_string(i + 1) + " of " + rv.name + " expects " +
                        g->locals[i].sort.str() + ", got " + s[i].str());
          }
        }
        return g->ret_sort;
      }
      if (is_override(rv.name)) {
        if (auto r = override_result(rv.name, s)) return r;
        return fail("built-in " + rv.name + " cannot take these arguments");
      }
      return fail("call to undeclared function " + rv.name);
    }
  }
  return fail("unknown rvalue");
}

std::vector<Diagnostic> sort_check(const Program& p) {
  std::vector<Diagnostic> d;
  std::set<std::string> sort_names;
  for (const auto& sd : p.sorts) {
    if (!sort_names.insert(sd.sort.name()).second) d.push_back({sd.span, "duplicate sort " + sd.sort.name()});
  }
  std::set<std::string> fn_names;
  for (const auto& f : p.functions) {
    if (!fn_names.insert(f.name).second) d.push_back({f.span, "duplicate function " + f.name});
  }
  for (const auto& f : p.functions) {
    auto diag = [&](const SourceSpan& sp, const std::string& m) { d.push_back({sp, "in " + f.name + ": " + m}); };
    if (f.is_test && f.spec_for) diag(f.span, "a function cannot be both a test and a spec");
    if ((f.is_test || f.spec_for) && f.num_params != 0) diag(f.span, "tests and specs take no parameters");
    if (f.spec_for) {
      const Function* t = p.find_function(*f.spec_for);
      if (!t) {
        diag(f.span, "spec_for names undeclared function " + *f.spec_for);
      } else if (t->is_test || t->spec_for) {
        diag(f.span, "spec_for target " + *f.spec_for + " is itself a test or spec");
      }
    }
    if (f.blocks.empty()) diag(f.span, "function has no blocks");
    std::set<std::string> local_names;
    for (const auto& l : f.locals) {
      if (!local_names.insert(l.name).second) diag(l.span, "duplicate local " + l.name);
      if (l.sort.contains_reference() && !(l.sort.is_ref() && !l.sort.elem().contains_reference())) {
        diag(l.span, "local " + l.name + " of sort " + l.sort.str() + ": references may only appear at top level");
      }
    }
    std::set<std::string> labels;
    for (const auto& b : f.blocks) {
      if (!labels.insert(b.label).second) diag(b.span, "duplicate block label " + b.label);
    }
    auto osort = [&](const Operand& o) -> std::optional<Sort> {
      if (!operand_ok(f, o)) return std::nullopt;
      return operand_sort(f, o);
    };
    for (const auto& b : f.blocks) {
      for (const auto& st : b.statements) {
        using SK = Statement::Kind;
        switch (st.kind) {
          case SK::Assign: {
            if (st.dest >= f.locals.size()) {
              diag(st.span, "assignment to undeclared local");
              break;
            }
            auto rs = rvalue_sort(p, f, st.rvalue, &d);
            if (rs && !(*rs == f.locals[st.dest].sort)) {
              diag(st.span, "cannot assign " + rs->str() + " to " + f.locals[st.dest].name + " of sort " +
                                f.locals[st.dest].sort.str());
            }
            break;
          }
          case SK::Store: {
            auto r = osort(st.a), v = osort(st.b);
            if (!r || !v || !r->is_ref() || !(r->elem() == *v)) {
              diag(st.span, "store needs a reference and a value of its pointee sort");
            }
            break;
          }
          case SK::Symbolic:
            if (st.dest >= f.locals.size()) {
              diag(st.span, "symbolic value for undeclared local");
              break;
            }
            if (st.sort.contains_reference()) diag(st.span, "symbolic values cannot have reference sort " + st.sort.str());
            if (!(st.sort == f.locals[st.dest].sort)) {
              diag(st.span, "symbolic " + st.sort.str() + " assigned to " + f.locals[st.dest].name + " of sort " +
                                f.locals[st.dest].sort.str());
            }
            break;
          case SK::Assume:
          case SK::Assert: {
            auto c = osort(st.a);
            if (!c || !c->is_bool()) {
              diag(st.span, std::string(st.kind == SK::Assume ? "assume" : "assert") + " condition is not bool");
            }
            break;
          }
          case SK::EnableSpec: {
            const Function* g = p.find_function(st.text);
            if (!g) {
              diag(st.span, "enable_spec names undeclared function " + st.text);
            } else if (!g->spec_for) {
              diag(st.span, "enable_spec target " + st.text + " is not a spec");
            }
            break;
          }
          case SK::Nop: break;
        }
      }
      const auto& t = b.terminator;
      for (auto tgt : t.targets) {
        if (tgt >= f.blocks.size()) diag(t.span, "jump to undeclared block");
      }
      using TK = Terminator::Kind;
      if (t.kind == TK::Branch) {
        auto c = osort(t.value);
        if (!c || !c->is_bool()) diag(t.span, "branch condition of sort " + (c ? c->str() : "?") + " is not bool");
        if (t.targets.size() != 2) diag(t.span, "branch needs two targets");
      } else if (t.kind == TK::Goto && t.targets.size() != 1) {
        diag(t.span, "goto needs one target");
      } else if (t.kind == TK::Return) {
        auto r = osort(t.value);
        if (!r || !(*r == f.ret_sort)) {
          diag(t.span, "return of " + (r ? r->str() : "?") + " from function returning " + f.ret_sort.str());
        }
      }
    }
    bool targets_ok = !f.blocks.empty();
    for (const auto& b : f.blocks) {
      for (auto tgt : b.terminator.targets) targets_ok = targets_ok && tgt < f.blocks.size();
    }
    if (targets_ok) {
      for (auto& x : definite_assignment(f)) d.push_back(std::move(x));
    }
  }
  return d;
}

std::vector<BlockId> successors(const Block& b) { return b.terminator.targets; }

bool is_exit_terminator(const Terminator& t) {
  return t.kind == Terminator::Kind::Return || t.kind == Terminator::Kind::Panic ||
         t.kind == Terminator::Kind::Unreachable;
}

namespace {

std::vector<bool> reachable_from_entry(const Function& f) {
  std::vector<bool> seen(f.blocks.size(), false);
  if (f.blocks.empty()) return seen;
  std::vector<BlockId> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    BlockId b = stack.back();
    stack.pop_back();
    for (auto s : successors(f.blocks[b])) {
      if (!seen[s]) {
        seen[s] = true;
        stack.push_back(s);
      }
    }
  }
  return seen;
}

}  // namespace

// Iterative dominator algorithm (Cooper, Harvey, Kennedy) on the reversed CFG
// rooted at a virtual exit node.
PostDominators immediate_postdominators(const Function& f) {
  PostDominators out;
  const std::size_t n = f.blocks.size();
  auto reach = reachable_from_entry(f);
  for (BlockId b = 0; b < n; ++b) {
    if (!reach[b]) out.unreachable.push_back(b);
  }
  const std::size_t exit = n;  // node index of the virtual exit
  // Reverse-graph successors of x = CFG predecessors; the exit's reverse
  // successors are blocks ending in exit terminators.
  std::vector<std::vector<std::size_t>> preds(n + 1), succs(n + 1);
  for (BlockId b = 0; b < n; ++b) {
    if (!reach[b]) continue;
    for (auto s : successors(f.blocks[b])) {
      succs[b].push_back(s);
      preds[s].push_back(b);
    }
    if (is_exit_terminator(f.blocks[b].terminator)) {
      succs[b].push_back(exit);
      preds[exit].push_back(b);
    }
  }
  // Blocks that cannot reach exit (infinite loops) get a virtual edge to it.
  auto reaches_exit = [&]() {
    std::vector<bool> r(n + 1, false);
    std::vector<std::size_t> st{exit};
    r[exit] = true;
    while (!st.empty()) {
      auto x = st.back();
      st.pop_back();
      for (auto p : preds[x]) {
        if (!r[p]) {
          r[p] = true;
          st.push_back(p);
        }
      }
    }
    return r;
  };
  auto re = reaches_exit();
  for (BlockId b = 0; b < n; ++b) {
    if (reach[b] && !re[b]) {
      succs[b].push_back(exit);
      preds[exit].push_back(b);
    }
  }
  // Postorder of the reverse graph from exit.
  std::vector<int> po(n + 1, -1);
  std::vector<std::size_t> order;
  {
    std::vector<std::pair<std::size_t, std::size_t>> st{{exit, 0}};
    std::vector<bool> vis(n + 1, false);
    vis[exit] = true;
    while (!st.empty()) {
      auto& [x, i] = st.back();
      if (i < preds[x].size()) {
        auto y = preds[x][i++];
        if (!vis[y]) {
          vis[y] = true;
          st.push_back({y, 0});
        }
      } else {
        po[x] = static_cast<int>(order.size());
        order.push_back(x);
        st.pop_back();
      }
    }
  }
  constexpr std::size_t kUndef = SIZE_MAX;
  std::vector<std::size_t> idom(n + 1, kUndef);
  idom[exit] = exit;
  auto intersect = [&](std::size_t a, std::size_t b) {
    while (a != b) {
      while (po[a] < po[b]) a = idom[a];
      while (po[b] < po[a]) b = idom[b];
    }
    return a;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      std::size_t x = *it;
      if (x == exit) continue;
      std::size_t nd = kUndef;
      for (auto s : succs[x]) {
        if (idom[s] == kUndef) continue;
        nd = nd == kUndef ? s : intersect(s, nd);
      }
      if (nd != idom[x]) {
        idom[x] = nd;
        changed = true;
      }
    }
  }
  for (BlockId b = 0; b < n; ++b) {
    if (!reach[b]) continue;
    out.ipdom[b] = idom[b] == exit ? kExitBlock : static_cast<BlockId>(idom[b]);
  }
  return out;
}

namespace {

void operands_of(const Statement& st, std::vector<const Operand*>& out) {
  using SK = Statement::Kind;
  switch (st.kind) {
    case SK::Assign:
      for (const auto& a : st.rvalue.args) out.push_back(&a);
      break;
    case SK::Store:
      out.push_back(&st.a);
      out.push_back(&st.b);
      break;
    case SK::Assume:
    case SK::Assert: out.push_back(&st.a); break;
    default: break;
  }
}

}  // namespace

std::vector<Diagnostic> definite_assignment(const Function& f) {
  std::vector<Diagnostic> diags;
  const std::size_t n = f.blocks.size();
  const std::size_t nl = f.locals.size();
  if (n == 0) return diags;
  auto reach = reachable_from_entry(f);
  std::vector<std::vector<BlockId>> preds(n);
  for (BlockId b = 0; b < n; ++b) {
    if (!reach[b]) continue;
    for (auto s : successors(f.blocks[b])) preds[s].push_back(b);
  }
  auto transfer = [&](BlockId b, std::vector<bool> in) {
    for (const auto& st : f.blocks[b].statements) {
      if ((st.kind == Statement::Kind::Assign || st.kind == Statement::Kind::Symbolic) && st.dest < nl) {
        in[st.dest] = true;
      }
    }
    return in;
  };
  std::vector<std::vector<bool>> out(n, std::vector<bool>(nl, true));
  std::vector<bool> entry_in(nl, false);
  for (std::size_t i = 0; i < f.num_params && i < nl; ++i) entry_in[i] = true;
  auto in_of = [&](BlockId b) {
    std::vector<bool> in(nl, true);
    if (b == 0) {
      in = entry_in;
    }
    for (auto p : preds[b]) {
      for (std::size_t i = 0; i < nl; ++i) in[i] = in[i] && out[p][i];
    }
    return in;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (BlockId b = 0; b < n; ++b) {
      if (!reach[b]) continue;
      auto o = transfer(b, in_of(b));
      if (o != out[b]) {
        out[b] = std::move(o);
        changed = true;
      }
    }
  }
  std::vector<bool> reported(nl, false);
  auto check = [&](const Operand& o, std::vector<bool>& cur, const SourceSpan& sp) {
    if (o.kind != Operand::Kind::Local || o.local >= nl) return;
    if (!cur[o.local] && !reported[o.local]) {
      reported[o.local] = true;
      diags.push_back({o.span.line ? o.span : sp,
                       "in " + f.name + ": local " + f.locals[o.local].name + " may be read before assignment"});
    }
  };
  for (BlockId b = 0; b < n; ++b) {
    if (!reach[b]) continue;
    auto cur = in_of(b);
    for (const auto& st : f.blocks[b].statements) {
      std::vector<const Operand*> ops;
      operands_of(st, ops);
      for (auto* o : ops) check(*o, cur, st.span);
      if ((st.kind == Statement::Kind::Assign || st.kind == Statement::Kind::Symbolic) && st.dest < nl) {
        cur[st.dest] = true;
      }
    }
    const auto& t = f.blocks[b].terminator;
    if (t.kind == Terminator::Kind::Branch || t.kind == Terminator::Kind::Return) check(t.value, cur, t.span);
  }
  return diags;
}

}  // namespace cruxlite
