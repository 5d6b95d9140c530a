#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cruxlite/sort.hpp"
#include "cruxlite/term.hpp"
#include "cruxlite/value.hpp"

namespace cruxlite {

struct SourceSpan {
  std::string file;
  std::uint32_t line = 0;
  std::uint32_t col = 0;
  std::uint32_t end_col = 0;

  std::string str() const;
  // IR equality is structural; locations never participate.
  friend bool operator==(const SourceSpan&, const SourceSpan&) { return true; }
};

using LocalId = std::uint32_t;
using BlockId = std::uint32_t;

struct Operand {
  enum class Kind : std::uint8_t { Local, Const };
  Kind kind = Kind::Const;
  LocalId local = 0;
  Value value;  // Const: bool, bit-vector or unit
  SourceSpan span;

  static Operand of_local(LocalId id, SourceSpan sp = {}) {
    Operand o;
    o.kind = Kind::Local;
    o.local = id;
    o.span = std::move(sp);
    return o;
  }
  static Operand of_const(Value v, SourceSpan sp = {}) {
    Operand o;
    o.value = std::move(v);
    o.span = std::move(sp);
    return o;
  }
  friend bool operator==(const Operand&, const Operand&) = default;
};

struct Rvalue {
  enum class Kind : std::uint8_t {
    Use,         // args[0]
    Prim,        // op over args; param = zext/trunc width
    Checked,     // op in {BvAdd, BvSub, BvMul, BvUDiv, BvURem}
    Tuple,       // args
    Array,       // args; sort = array sort
    Record,      // args in declaration order; sort = record sort
    Variant,     // args[0] payload; sort, index = arm
    Field,       // args[0].index (tuple position or record field)
    Payload,     // args[0] arm payload, index = arm
    Tag,         // variant tag of args[0]
    IsArm,       // tag of args[0] == index
    Index,       // args[0][args[1]], bounds-checked
    Update,      // args[0] with [args[1]] := args[2], bounds-checked
    Alloc,       // sort, initial value args[0]
    Load,        // *args[0]
    RefField,    // reference to member `index` of *args[0]
    RefIndex,    // reference to element args[1] of *args[0]
    RefPayload,  // reference to arm `index` payload of *args[0]
    Call,        // name(args)
  };
  Kind kind = Kind::Use;
  Op op = Op::UnitConst;
  u128 param = 0;
  std::vector<Operand> args;
  Sort sort;
  std::string name;  // callee, or selector label as written
  std::size_t index = 0;
  SourceSpan span;

  friend bool operator==(const Rvalue&, const Rvalue&) = default;
};

struct Statement {
  enum class Kind : std::uint8_t { Assign, Store, Symbolic, Assume, Assert, EnableSpec, Nop };
  Kind kind = Kind::Nop;
  LocalId dest = 0;   // Assign, Symbolic
  Rvalue rvalue;      // Assign
  Operand a;          // Store: reference; Assume/Assert: condition
  Operand b;          // Store: value
  Sort sort;          // Symbolic
  std::string text;   // Symbolic name, Assert message, EnableSpec target
  bool has_message = false;
  SourceSpan span;

  friend bool operator==(const Statement&, const Statement&) = default;
};

struct Terminator {
  enum class Kind : std::uint8_t { Goto, Branch, Return, Panic, Unreachable };
  Kind kind = Kind::Unreachable;
  Operand value;                 // Branch condition, Return value
  std::vector<BlockId> targets;  // Goto: 1, Branch: then, else
  std::string text;              // Panic message
  SourceSpan span;

  friend bool operator==(const Terminator&, const Terminator&) = default;
};

struct Block {
  std::string label;
  std::vector<Statement> statements;
  Terminator terminator;
  SourceSpan span;
  friend bool operator==(const Block&, const Block&) = default;
};

struct Local {
  std::string name;
  Sort sort;
  SourceSpan span;
  friend bool operator==(const Local&, const Local&) = default;
};

struct Function {
  std::string name;
  std::size_t num_params = 0;
  std::vector<Local> locals;  // params first
  Sort ret_sort;
  std::vector<Block> blocks;  // blocks[0] is the entry
  bool is_test = false;
  std::optional<std::string> spec_for;
  SourceSpan span;

  std::optional<BlockId> find_block(const std::string& label) const;
  std::optional<LocalId> find_local(const std::string& name) const;
  friend bool operator==(const Function&, const Function&) = default;
};

struct SortDecl {
  Sort sort;  // Record or Variant
  SourceSpan span;
  friend bool operator==(const SortDecl&, const SortDecl&) = default;
};

struct Program {
  std::vector<SortDecl> sorts;
  std::vector<Function> functions;

  const Function* find_function(const std::string& name) const;
  const SortDecl* find_sort(const std::string& name) const;
  friend bool operator==(const Program&, const Program&) = default;
};

struct Diagnostic {
  SourceSpan span;
  std::string message;
  std::string str() const;
};

/// Result sort of an rvalue, nullopt with diagnostics when ill-formed.
std::optional<Sort> rvalue_sort(const Program& p, const Function& f, const Rvalue& rv,
                                std::vector<Diagnostic>* diags);

std::vector<Diagnostic> sort_check(const Program& p);

/// Marker for the virtual exit node in post-dominator maps.
inline constexpr BlockId kExitBlock = UINT32_MAX;

struct PostDominators {
  std::map<BlockId, BlockId> ipdom;  // reachable blocks only; kExitBlock for exit
  std::vector<BlockId> unreachable;
};

std::vector<BlockId> successors(const Block& b);
bool is_exit_terminator(const Terminator& t);
PostDominators immediate_postdominators(const Function& f);

std::vector<Diagnostic> definite_assignment(const Function& f);

/// Opcode keyword as written in the textual IR ("add", "ult", ...).
std::string_view prim_keyword(Op op);
std::optional<Op> prim_from_keyword(std::string_view kw);

}  // namespace cruxlite

namespace cruxlite {

/// Built-in replacements for a few library routines, callable when no
/// program function of that name exists: rotl, rotr, umax, umin (bvN x bvN)
/// and sort ([bvN; L], ascending unsigned insertion sort).
bool is_override(const std::string& name);
std::optional<Sort> override_result(const std::string& name, const std::vector<Sort>& args);

}  // namespace cruxlite
