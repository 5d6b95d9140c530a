#pragma once

// Plain tree evaluator over scalar expressions, written without any of the
// library's term code. Widths up to 16; width 0 means Bool.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

struct Expr;
using ExprP = std::shared_ptr<const Expr>;

struct Expr {
  std::string op;
  std::vector<ExprP> kids;
  unsigned width = 0;
  std::uint64_t value = 0;  // const
  int sym = -1;             // symbol slot
};

inline std::uint64_t mask(unsigned w) { return w == 0 ? 1 : ((std::uint64_t{1} << w) - 1); }

inline std::int64_t sgn(std::uint64_t v, unsigned w) {
  if (v & (std::uint64_t{1} << (w - 1))) return static_cast<std::int64_t>(v) - (std::int64_t{1} << w);
  return static_cast<std::int64_t>(v);
}

inline std::uint64_t eval(const Expr& e, const std::vector<std::uint64_t>& env) {
  auto k = [&](std::size_t i) { return eval(*e.kids[i], env); };
  const std::string& op = e.op;
  std::uint64_t m = mask(e.width);
  if (op == "const") return e.value & m;
  if (op == "sym") return env.at(static_cast<std::size_t>(e.sym)) & m;
  if (op == "not") return k(0) ? 0 : 1;
  if (op == "and") return (k(0) && k(1)) ? 1 : 0;
  if (op == "or") return (k(0) || k(1)) ? 1 : 0;
  if (op == "xor") return (!!k(0) != !!k(1)) ? 1 : 0;
  if (op == "implies") return (!k(0) || k(1)) ? 1 : 0;
  if (op == "ite") return k(0) ? k(1) : k(2);
  if (op == "eq") return k(0) == k(1) ? 1 : 0;
  if (op == "add") return (k(0) + k(1)) & m;
  if (op == "sub") return (k(0) - k(1)) & m;
  if (op == "mul") return (k(0) * k(1)) & m;
  if (op == "udiv") {
    std::uint64_t d = k(1);
    return d == 0 ? m : k(0) / d;
  }
  if (op == "urem") {
    std::uint64_t d = k(1);
    return d == 0 ? 0 : k(0) % d;
  }
  if (op == "band") return k(0) & k(1);
  if (op == "bor") return k(0) | k(1);
  if (op == "bxor") return k(0) ^ k(1);
  if (op == "bnot") return ~k(0) & m;
  if (op == "neg") return (0 - k(0)) & m;
  if (op == "shl") {
    std::uint64_t s = k(1);
    return s >= e.width ? 0 : (k(0) << s) & m;
  }
  if (op == "lshr") {
    std::uint64_t s = k(1);
    return s >= e.width ? 0 : k(0) >> s;
  }
  unsigned cw = e.kids.empty() ? 0 : e.kids[0]->width;
  if (op == "ult") return k(0) < k(1);
  if (op == "ule") return k(0) <= k(1);
  if (op == "ugt") return k(0) > k(1);
  if (op == "uge") return k(0) >= k(1);
  if (op == "slt") return sgn(k(0), cw) < sgn(k(1), cw);
  if (op == "sle") return sgn(k(0), cw) <= sgn(k(1), cw);
  if (op == "zext") return k(0);
  if (op == "trunc") return k(0) & m;
  if (op == "concat") return ((k(0) << e.kids[1]->width) | k(1)) & m;
  throw std::logic_error("oracle: unknown op " + op);
}

inline ExprP mk(std::string op, std::vector<ExprP> kids, unsigned width, std::uint64_t value = 0, int sym = -1) {
  auto e = std::make_shared<Expr>();
  e->op = std::move(op);
  e->kids = std::move(kids);
  e->width = width;
  e->value = value;
  e->sym = sym;
  return e;
}

}  // namespace oracle
