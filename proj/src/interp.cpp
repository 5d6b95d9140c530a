#include "cruxlite/interp.hpp"

#include <algorithm>

#include "cruxlite/error.hpp"

namespace cruxlite {

namespace {

struct PanicStop {};
struct AssumeStop {};

Value bv(u128 bits, unsigned w) { return Value::bitvec(bits & width_mask(w), w); }

bool ult(u128 a, u128 b) { return a < b; }

bool slt(u128 a, u128 b, unsigned w) {
  u128 sign = u128{1} << (w - 1);
  return (a ^ sign) < (b ^ sign);
}

}  // namespace

std::string occurrence_key(const std::string& fn, const std::string& block, std::size_t idx, unsigned count) {
  return fn + ":" + block + ":" + std::to_string(idx) + "#" + std::to_string(count);
}

Value concrete_prim(Op op, const Sort& result, u128 param, const std::vector<Value>& a) {
  auto w = [&](std::size_t i) { return a[i].width(); };
  switch (op) {
    case Op::Not: return Value::boolean(!a[0].as_bool());
    case Op::And: return Value::boolean(a[0].as_bool() && a[1].as_bool());
    case Op::Or: return Value::boolean(a[0].as_bool() || a[1].as_bool());
    case Op::Xor: return Value::boolean(a[0].as_bool() != a[1].as_bool());
    case Op::Implies: return Value::boolean(!a[0].as_bool() || a[1].as_bool());
    case Op::Ite: return a[0].as_bool() ? a[1] : a[2];
    case Op::Eq: return Value::boolean(a[0] == a[1]);
    case Op::BvAdd: return bv(a[0].bits() + a[1].bits(), w(0));
    case Op::BvSub: return bv(a[0].bits() - a[1].bits(), w(0));
    case Op::BvMul: return bv(a[0].bits() * a[1].bits(), w(0));
    case Op::BvUDiv:
      return a[1].bits() == 0 ? bv(width_mask(w(0)), w(0)) : bv(a[0].bits() / a[1].bits(), w(0));
    case Op::BvURem: return a[1].bits() == 0 ? bv(0, w(0)) : bv(a[0].bits() % a[1].bits(), w(0));
    case Op::BvAnd: return bv(a[0].bits() & a[1].bits(), w(0));
    case Op::BvOr: return bv(a[0].bits() | a[1].bits(), w(0));
    case Op::BvXor: return bv(a[0].bits() ^ a[1].bits(), w(0));
    case Op::BvNot: return bv(~a[0].bits(), w(0));
    case Op::BvNeg: return bv(u128{0} - a[0].bits(), w(0));
    case Op::BvShl: return a[1].bits() >= w(0) ? bv(0, w(0)) : bv(a[0].bits() << a[1].bits(), w(0));
    case Op::BvLShr: return a[1].bits() >= w(0) ? bv(0, w(0)) : bv(a[0].bits() >> a[1].bits(), w(0));
    case Op::BvULt: return Value::boolean(ult(a[0].bits(), a[1].bits()));
    case Op::BvULe: return Value::boolean(!ult(a[1].bits(), a[0].bits()));
    case Op::BvUGt: return Value::boolean(ult(a[1].bits(), a[0].bits()));
    case Op::BvUGe: return Value::boolean(!ult(a[0].bits(), a[1].bits()));
    case Op::BvSLt: return Value::boolean(slt(a[0].bits(), a[1].bits(), w(0)));
    case Op::BvSLe: return Value::boolean(!slt(a[1].bits(), a[0].bits(), w(0)));
    case Op::BvZeroExtend: return bv(a[0].bits(), static_cast<unsigned>(param));
    case Op::BvTruncate: return bv(a[0].bits(), static_cast<unsigned>(param));
    case Op::BvConcat: {
      unsigned wb = w(1);
      u128 hi = wb >= 128 ? 0 : a[0].bits() << wb;
      return bv(hi | a[1].bits(), w(0) + wb);
    }
    default: break;
  }
  (void)result;
  throw EngineError(std::string("concrete: unsupported primitive ") + std::string(op_name(op)));
}

Value concrete_override(const std::string& name, const std::vector<Value>& a) {
  if (name == "rotl" || name == "rotr") {
    unsigned w = a[0].width();
    u128 k = a[1].bits() % w;
    u128 x = a[0].bits();
    if (k == 0) return a[0];
    if (name == "rotr") k = w - k;
    return bv((x << k) | (x >> (w - k)), w);
  }
  if (name == "umax") return a[0].bits() >= a[1].bits() ? a[0] : a[1];
  if (name == "umin") return a[0].bits() <= a[1].bits() ? a[0] : a[1];
  if (name == "sort") {
    Value out = a[0];
    auto& m = out.members();
    for (std::size_t i = 1; i < m.size(); ++i) {
      for (std::size_t j = i; j > 0 && m[j - 1].bits() > m[j].bits(); --j) std::swap(m[j - 1], m[j]);
    }
    return out;
  }
  throw EngineError("concrete: unknown override " + name);
}

struct Interpreter::Frame {
  const Function* fn;
  std::vector<std::optional<Value>> locals;
};

Interpreter::Interpreter(const Program& p, InterpHooks hooks, InterpOptions opts)
    : prog_(p), hooks_(std::move(hooks)), opts_(opts) {}

InterpResult Interpreter::run(const Function& f) {
  InterpResult r;
  try {
    call(f, {});
  } catch (const PanicStop&) {
  } catch (const AssumeStop&) {
    r.status = InterpResult::Status::AssumptionFailed;
  } catch (const Error& e) {
    r.status = InterpResult::Status::Error;
    r.error = e.what();
  }
  r.failures = failures_;
  r.trace = trace_;
  return r;
}

void Interpreter::record(const std::string& line) {
  if (opts_.trace) trace_.push_back(line);
}

void Interpreter::fail(ObligationKind kind, const SourceSpan& where, std::string message) {
  failures_.push_back({kind, where, std::move(message), ""});
  record(where.str() + ": " + std::string(kind_name(kind)) + " FAILED");
}

std::string Interpreter::enabled_spec(const std::string& target) const {
  auto it = enabled_by_.find(target);
  return it == enabled_by_.end() ? "" : it->second;
}

void Interpreter::assumption_failed() { throw AssumeStop{}; }

Value Interpreter::operand(const Frame& fr, const Operand& o) const {
  if (o.kind == Operand::Kind::Const) return o.value;
  const auto& v = fr.locals.at(o.local);
  if (!v) throw EngineError("concrete: read of unassigned local " + fr.fn->locals[o.local].name);
  return *v;
}

Value Interpreter::call(const Function& f, const std::vector<Value>& args) {
  if (++depth_ > opts_.max_depth) throw EngineError("concrete: call depth limit exceeded in " + f.name);
  Value v = exec_body(f, args);
  --depth_;
  return v;
}

Value Interpreter::exec_body(const Function& f, const std::vector<Value>& args) {
  Frame fr{&f, {}};
  fr.locals.resize(f.locals.size());
  for (std::size_t i = 0; i < args.size(); ++i) fr.locals[i] = args[i];
  BlockId b = 0;
  for (;;) {
    if (++steps_ > opts_.max_steps) throw EngineError("concrete: step limit exceeded in " + f.name);
    const Block& blk = f.blocks.at(b);
    for (std::size_t i = 0; i < blk.statements.size(); ++i) exec_statement(fr, blk.statements[i], blk, i);
    const Terminator& t = blk.terminator;
    switch (t.kind) {
      case Terminator::Kind::Goto: b = t.targets[0]; break;
      case Terminator::Kind::Branch: b = operand(fr, t.value).as_bool() ? t.targets[0] : t.targets[1]; break;
      case Terminator::Kind::Return: {
        Value v = operand(fr, t.value);
        record(t.span.str() + ": " + f.name + " returns " + v.str());
        return v;
      }
      case Terminator::Kind::Panic:
        fail(ObligationKind::Panic, t.span, t.text.empty() ? "panic" : t.text);
        failures_.back().function = f.name;
        throw PanicStop{};
      case Terminator::Kind::Unreachable:
        fail(ObligationKind::Unreachable, t.span, "unreachable reached");
        failures_.back().function = f.name;
        throw PanicStop{};
    }
  }
}

void Interpreter::exec_statement(Frame& fr, const Statement& st, const Block& b, std::size_t idx) {
  const Function& f = *fr.fn;
  auto fail_here = [&](ObligationKind k, const SourceSpan& sp, std::string msg) {
    fail(k, sp, std::move(msg));
    failures_.back().function = f.name;
  };
  switch (st.kind) {
    case Statement::Kind::Nop: return;
    case Statement::Kind::Assign: {
      std::string key;
      if (st.rvalue.kind == Rvalue::Kind::Call) {
        std::string loc = f.name + ":" + b.label + ":" + std::to_string(idx);
        key = occurrence_key(f.name, b.label, idx, occurrences_[loc]++);
      }
      std::size_t before = failures_.size();
      Value v = st.rvalue.kind == Rvalue::Kind::Call ? call_site(fr, st.rvalue, key)
                                                      : eval_rvalue(fr, st.rvalue, f.locals[st.dest].sort);
      for (std::size_t i = before; i < failures_.size(); ++i) {
        if (failures_[i].function.empty()) failures_[i].function = f.name;
      }
      record(st.span.str() + ": " + f.locals[st.dest].name + " = " + v.str());
      fr.locals[st.dest] = std::move(v);
      return;
    }
    case Statement::Kind::Store: {
      Value r = operand(fr, st.a);
      Value v = operand(fr, st.b);
      bool ok = true;
      Value& slot = deref(fr, r, st.span, ok);
      if (ok) slot = v;
      record(st.span.str() + ": store " + v.str());
      return;
    }
    case Statement::Kind::Symbolic: {
      std::string loc = f.name + ":" + b.label + ":" + std::to_string(idx);
      std::string key = occurrence_key(f.name, b.label, idx, occurrences_[loc]++);
      if (!hooks_.symbolic) throw EngineError("concrete: no input for symbolic " + st.text);
      Value v = hooks_.symbolic(key, st.text, st.sort);
      record(st.span.str() + ": " + f.locals[st.dest].name + " = symbolic " + st.text + " -> " + v.str());
      fr.locals[st.dest] = std::move(v);
      return;
    }
    case Statement::Kind::Assume: {
      bool c = operand(fr, st.a).as_bool();
      record(st.span.str() + ": assume " + (c ? "true" : "false"));
      if (!c) throw AssumeStop{};
      return;
    }
    case Statement::Kind::Assert: {
      bool c = operand(fr, st.a).as_bool();
      record(st.span.str() + ": assert " + (c ? "true" : "false"));
      if (!c) fail_here(ObligationKind::Assert, st.span, st.has_message ? st.text : "assertion failed");
      return;
    }
    case Statement::Kind::EnableSpec:
      if (const Function* spec = prog_.find_function(st.text); spec && spec->spec_for) {
        enabled_.insert(*spec->spec_for);
        enabled_by_[*spec->spec_for] = st.text;
      }
      record(st.span.str() + ": enable_spec " + st.text);
      return;
  }
}

Value Interpreter::call_site(Frame& fr, const Rvalue& rv, const std::string& key) {
  std::vector<Value> args;
  for (const auto& o : rv.args) args.push_back(operand(fr, o));
  const Function* callee = prog_.find_function(rv.name);
  if (!callee) {
    if (is_override(rv.name)) return concrete_override(rv.name, args);
    throw EngineError("concrete: call to unknown function " + rv.name);
  }
  if (hooks_.call && enabled_.count(callee->name)) {
    if (auto v = hooks_.call(*this, *callee, args, key, rv.span)) return *v;
  }
  return call(*callee, args);
}

Value& Interpreter::deref(Frame& fr, const Value& ref, const SourceSpan& where, bool& ok) {
  (void)fr;
  Value* cur = &heap_.at(ref.alloc());
  ok = true;
  for (const auto& step : ref.path()) {
    switch (step.kind) {
      case ConcretePathStep::Kind::Member: cur = &cur->members().at(step.index); break;
      case ConcretePathStep::Kind::Arm:
        // An inactive arm reads as zero and ignores writes.
        if (cur->arm() != step.index) {
          ok = false;
          scratch_ = Value::zero(cur->sort().members()[step.index]);
          cur = &scratch_;
        } else {
          cur = &cur->members().front();
        }
        break;
      case ConcretePathStep::Kind::Index: {
        auto& ms = cur->members();
        if (step.index >= ms.size()) {
          fail(ObligationKind::Bounds, where, "index out of bounds");
          failures_.back().function = fr.fn->name;
          ok = false;
          cur = &ms.back();
        } else {
          cur = &ms[step.index];
        }
        break;
      }
    }
  }
  return *cur;
}

Value Interpreter::eval_rvalue(Frame& fr, const Rvalue& rv, const Sort& dest_sort) {
  auto arg = [&](std::size_t i) { return operand(fr, rv.args.at(i)); };
  switch (rv.kind) {
    case Rvalue::Kind::Use: return arg(0);
    case Rvalue::Kind::Prim:
    case Rvalue::Kind::Checked: {
      std::vector<Value> as;
      for (const auto& o : rv.args) as.push_back(operand(fr, o));
      if (rv.op == Op::BvUDiv || rv.op == Op::BvURem) {
        if (as[1].bits() == 0) fail(ObligationKind::DivByZero, rv.span, "division by zero");
      } else if (rv.kind == Rvalue::Kind::Checked) {
        unsigned w = as[0].width();
        u128 x = as[0].bits(), y = as[1].bits();
        bool over = false;
        if (rv.op == Op::BvAdd) over = x > (width_mask(w) - y);
        else if (rv.op == Op::BvSub) over = y > x;
        else if (rv.op == Op::BvMul) over = y != 0 && x > width_mask(w) / y;
        if (over) fail(ObligationKind::Overflow, rv.span, std::string("arithmetic overflow in ") +
                                                               std::string(prim_keyword(rv.op)));
      }
      return concrete_prim(rv.op, dest_sort, rv.param, as);
    }
    case Rvalue::Kind::Tuple:
    case Rvalue::Kind::Array:
    case Rvalue::Kind::Record: {
      std::vector<Value> ms;
      for (const auto& o : rv.args) ms.push_back(operand(fr, o));
      return Value::aggregate(dest_sort, std::move(ms));
    }
    case Rvalue::Kind::Variant: return Value::variant(dest_sort, rv.index, arg(0));
    case Rvalue::Kind::Field: return arg(0).members().at(rv.index);
    case Rvalue::Kind::Payload: {
      Value v = arg(0);
      if (v.arm() != rv.index) return Value::zero(v.sort().members()[rv.index]);
      return v.payload();
    }
    case Rvalue::Kind::Tag: return Value::bitvec(arg(0).arm(), kVariantTagWidth);
    case Rvalue::Kind::IsArm: return Value::boolean(arg(0).arm() == rv.index);
    case Rvalue::Kind::Index: {
      Value a = arg(0);
      u128 i = arg(1).bits();
      const auto& ms = a.members();
      if (i >= ms.size()) {
        fail(ObligationKind::Bounds, rv.span, "index out of bounds");
        return ms.back();
      }
      return ms[static_cast<std::size_t>(i)];
    }
    case Rvalue::Kind::Update: {
      Value a = arg(0);
      u128 i = arg(1).bits();
      if (i >= a.members().size()) {
        fail(ObligationKind::Bounds, rv.span, "index out of bounds");
        return a;
      }
      a.members()[static_cast<std::size_t>(i)] = arg(2);
      return a;
    }
    case Rvalue::Kind::Alloc: {
      heap_.push_back(arg(0));
      return Value::reference(dest_sort, static_cast<std::uint32_t>(heap_.size() - 1), {});
    }
    case Rvalue::Kind::Load: {
      bool ok = true;
      Value r = arg(0);
      return deref(fr, r, rv.span, ok);
    }
    case Rvalue::Kind::RefField:
    case Rvalue::Kind::RefIndex:
    case Rvalue::Kind::RefPayload: {
      Value r = arg(0);
      auto path = r.path();
      ConcretePathStep step{ConcretePathStep::Kind::Member, rv.index};
      if (rv.kind == Rvalue::Kind::RefIndex) {
        step = {ConcretePathStep::Kind::Index, static_cast<std::uint64_t>(arg(1).bits())};
      } else if (rv.kind == Rvalue::Kind::RefPayload) {
        step.kind = ConcretePathStep::Kind::Arm;
      }
      path.push_back(step);
      return Value::reference(dest_sort, r.alloc(), std::move(path));
    }
    case Rvalue::Kind::Call: break;
  }
  throw EngineError("concrete: unsupported rvalue");
}

}  // namespace cruxlite
