#include "cruxlite/frontend.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "cruxlite/error.hpp"

namespace cruxlite {

namespace {

enum class Tok : std::uint8_t { Ident, Int, String, Punct, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;  // identifier, punctuation, or decoded string
  u128 value = 0;    // Int
  SourceSpan span;
};

struct ParseFailure {
  SourceSpan span;
  std::string message;
};

class Lexer {
 public:
  Lexer(std::string_view text, const std::string& file) : text_(text), file_(file) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.span = here();
      if (pos_ >= text_.size()) {
        t.kind = Tok::Eof;
        t.span = eof_span();
        out.push_back(t);
        return out;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t s = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          advance();
        }
        t.kind = Tok::Ident;
        t.text = std::string(text_.substr(s, pos_ - s));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Int;
        lex_int(t);
      } else if (c == '"') {
        t.kind = Tok::String;
        lex_string(t);
      } else if (c == '-' && peek(1) == '>') {
        t.kind = Tok::Punct;
        t.text = "->";
        advance();
        advance();
      } else if (std::string_view("{}()[]<>,:;.=#").find(c) != std::string_view::npos) {
        t.kind = Tok::Punct;
        t.text = std::string(1, c);
        advance();
      } else {
        throw ParseFailure{t.span, std::string("unexpected character '") + c + "'"};
      }
      t.span.end_col = col_;
      out.push_back(std::move(t));
    }
  }

 private:
  char peek(std::size_t k) const { return pos_ + k < text_.size() ? text_[pos_ + k] : '\0'; }
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  SourceSpan here() const { return SourceSpan{file_, line_, col_, col_}; }
  SourceSpan eof_span() const {
    if (text_.empty()) return SourceSpan{file_, 1, 1, 1};
    // Point at the last character of the input.
    std::uint32_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return SourceSpan{file_, line, col, col};
  }
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  void lex_int(Token& t) {
    u128 v = 0;
    std::size_t s = pos_;
    auto overflow = [&]() { throw ParseFailure{t.span, "integer literal exceeds 128 bits"}; };
    if (text_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      advance();
      advance();
      if (!std::isxdigit(static_cast<unsigned char>(peek(0)))) throw ParseFailure{t.span, "malformed hex literal"};
      while (pos_ < text_.size() && std::isxdigit(static_cast<unsigned char>(text_[pos_]))) {
        char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text_[pos_])));
        unsigned d = std::isdigit(static_cast<unsigned char>(c)) ? static_cast<unsigned>(c - '0') : static_cast<unsigned>(c - 'a' + 10);
        if (v >> 124) overflow();
        v = (v << 4) | d;
        advance();
      }
    } else {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        unsigned d = static_cast<unsigned>(text_[pos_] - '0');
        u128 nv = v * 10 + d;
        if (v != 0 && (nv - d) / 10 != v) overflow();
        v = nv;
        advance();
      }
    }
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      throw ParseFailure{t.span, "malformed number"};
    }
    t.value = v;
    t.text = std::string(text_.substr(s, pos_ - s));
  }
  void lex_string(Token& t) {
    advance();  // opening quote
    std::string s;
    for (;;) {
      if (pos_ >= text_.size() || text_[pos_] == '\n') throw ParseFailure{t.span, "unterminated string literal"};
      char c = text_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= text_.size()) throw ParseFailure{t.span, "unterminated string literal"};
        char e = text_[pos_];
        if (e == 'n') {
          s += '\n';
        } else if (e == 't') {
          s += '\t';
        } else if (e == '"' || e == '\\') {
          s += e;
        } else {
          throw ParseFailure{here(), std::string("unknown escape \\") + e};
        }
        advance();
        continue;
      }
      s += c;
      advance();
    }
    t.text = std::move(s);
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
  std::uint32_t col_ = 1;
};

const std::set<std::string, std::less<>>& keywords() {
  static const std::set<std::string, std::less<>> k = {
      "fn", "let", "record", "variant", "true", "false", "bool", "unit", "ref", "symbolic", "store", "assume",
      "assert", "enable_spec", "nop", "goto", "br", "ret", "panic", "unreachable", "call", "alloc", "load",
      "field", "payload", "tag", "is", "index", "update", "tuple", "mkarray", "reffield", "refindex",
      "refpayload", "checked_add", "checked_sub", "checked_mul", "checked_udiv", "checked_urem", "not", "and",
      "or", "xor", "implies", "ite", "eq", "add", "sub", "mul", "udiv", "urem", "band", "bor", "bxor", "bnot",
      "neg", "shl", "lshr", "ult", "ule", "ugt", "uge", "slt", "sle", "zext", "trunc", "concat"};
  return k;
}

bool is_bv_sort_word(std::string_view w, unsigned* width) {
  if (w.size() < 3 || w.substr(0, 2) != "bv") return false;
  unsigned v = 0;
  for (char c : w.substr(2)) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + static_cast<unsigned>(c - '0');
    if (v > 100000) return false;
  }
  if (width) *width = v;
  return true;
}

struct PendingName {
  std::string name;
  SourceSpan span;
  enum class Kind { Call, Enable, SpecFor } kind;
};

class Parser {
 public:
  Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program run() {
    Program p;
    prog_ = &p;
    while (!at_eof()) {
      if (is_word("record") || is_word("variant")) {
        p.sorts.push_back(sort_decl());
      } else if (is_punct("#") || is_word("fn")) {
        p.functions.push_back(function());
      } else {
        fail("expected 'record', 'variant', 'fn' or an annotation");
      }
    }
    for (const auto& n : names_) {
      bool known = p.find_function(n.name) != nullptr;
      if (!known && n.kind == PendingName::Kind::Call && is_override(n.name)) known = true;
      if (!known) throw ParseFailure{n.span, "unknown function " + n.name};
    }
    return p;
  }

 private:
  // --- token helpers
  const Token& cur() const { return toks_[pos_]; }
  bool at_eof() const { return cur().kind == Tok::Eof; }
  bool is_punct(std::string_view p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool is_word(std::string_view w) const { return cur().kind == Tok::Ident && cur().text == w; }
  bool next_is_punct(std::string_view p) const {
    return pos_ + 1 < toks_.size() && toks_[pos_ + 1].kind == Tok::Punct && toks_[pos_ + 1].text == p;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    std::string got = at_eof() ? "end of file" : "'" + cur().text + "'";
    throw ParseFailure{cur().span, msg + ", found " + got};
  }
  Token take() { return toks_[pos_++]; }
  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "'");
    ++pos_;
  }
  void expect_word(std::string_view w) {
    if (!is_word(w)) fail("expected '" + std::string(w) + "'");
    ++pos_;
  }
  Token ident(const char* what) {
    if (cur().kind != Tok::Ident) fail(std::string("expected ") + what);
    return take();
  }
  Token name_ident(const char* what) {
    if (cur().kind != Tok::Ident) fail(std::string("expected ") + what);
    if (keywords().count(cur().text)) fail(std::string("expected ") + what + " (keywords are reserved)");
    return take();
  }
  u128 integer(const char* what) {
    if (cur().kind != Tok::Int) fail(std::string("expected ") + what);
    return take().value;
  }
  std::string string_lit(const char* what) {
    if (cur().kind != Tok::String) fail(std::string("expected ") + what);
    return take().text;
  }

  // --- sorts
  Sort sort() {
    SourceSpan sp = cur().span;
    if (is_word("bool")) {
      ++pos_;
      return Sort::boolean();
    }
    if (is_word("unit")) {
      ++pos_;
      return Sort::unit();
    }
    if (is_word("ref")) {
      ++pos_;
      expect_punct("<");
      Sort inner = sort();
      expect_punct(">");
      return Sort::reference(inner);
    }
    if (is_punct("[")) {
      ++pos_;
      Sort elem = sort();
      expect_punct(";");
      u128 n = integer("array length");
      if (n > (u128{1} << 32)) throw ParseFailure{sp, "array length too large"};
      expect_punct("]");
      return Sort::array(elem, static_cast<std::uint64_t>(n));
    }
    if (is_punct("(")) {
      ++pos_;
      std::vector<Sort> elems;
      bool trailing = false;
      while (!is_punct(")")) {
        elems.push_back(sort());
        trailing = false;
        if (is_punct(",")) {
          ++pos_;
          trailing = true;
        } else {
          break;
        }
      }
      expect_punct(")");
      (void)trailing;
      return Sort::tuple(std::move(elems));
    }
    if (cur().kind == Tok::Ident) {
      unsigned w = 0;
      if (is_bv_sort_word(cur().text, &w)) {
        if (w == 0 || w > kMaxBitWidth) throw ParseFailure{sp, "bit-vector width " + std::to_string(w) + " outside 1..128"};
        ++pos_;
        return Sort::bitvec(w);
      }
      if (const SortDecl* d = prog_->find_sort(cur().text)) {
        ++pos_;
        return d->sort;
      }
      throw ParseFailure{sp, "unknown sort " + cur().text};
    }
    fail("expected a sort");
  }

  SortDecl sort_decl() {
    SortDecl d;
    d.span = cur().span;
    bool is_record = is_word("record");
    ++pos_;
    Token name = name_ident("sort name");
    if (prog_->find_sort(name.text)) throw ParseFailure{name.span, "duplicate sort " + name.text};
    expect_punct("{");
    std::vector<std::pair<std::string, Sort>> members;
    std::set<std::string> seen;
    while (!is_punct("}")) {
      if (at_eof()) fail("unterminated declaration");
      Token label = ident(is_record ? "field name" : "arm name");
      if (!seen.insert(label.text).second) throw ParseFailure{label.span, "duplicate member " + label.text};
      if (is_record) {
        expect_punct(":");
        members.emplace_back(label.text, sort());
      } else {
        expect_punct("(");
        members.emplace_back(label.text, sort());
        expect_punct(")");
      }
      if (is_punct(",")) ++pos_;
    }
    expect_punct("}");
    try {
      d.sort = is_record ? Sort::record(name.text, std::move(members)) : Sort::variant(name.text, std::move(members));
    } catch (const SortError& e) {
      throw ParseFailure{name.span, e.what()};
    }
    return d;
  }

  // --- functions
  Function function() {
    Function f;
    f.span = cur().span;
    while (is_punct("#")) {
      SourceSpan sp = cur().span;
      ++pos_;
      expect_punct("[");
      Token a = ident("annotation");
      if (a.text == "test") {
        if (f.is_test) throw ParseFailure{sp, "duplicate #[test]"};
        f.is_test = true;
      } else if (a.text == "spec_for") {
        if (f.spec_for) throw ParseFailure{sp, "duplicate #[spec_for]"};
        expect_punct("(");
        Token target = ident("function name");
        names_.push_back({target.text, target.span, PendingName::Kind::SpecFor});
        f.spec_for = target.text;
        expect_punct(")");
      } else {
        throw ParseFailure{a.span, "unknown annotation " + a.text};
      }
      expect_punct("]");
    }
    f.span = cur().span;
    expect_word("fn");
    Token name = name_ident("function name");
    f.name = name.text;
    if (prog_->find_function(f.name)) throw ParseFailure{name.span, "duplicate function " + f.name};
    fn_ = &f;
    expect_punct("(");
    while (!is_punct(")")) {
      Token pn = name_ident("parameter name");
      expect_punct(":");
      declare(pn, sort());
      if (!is_punct(",")) break;
      ++pos_;
    }
    expect_punct(")");
    f.num_params = f.locals.size();
    expect_punct("->");
    f.ret_sort = sort();
    expect_punct("{");
    while (is_word("let")) {
      ++pos_;
      Token ln = name_ident("local name");
      expect_punct(":");
      declare(ln, sort());
    }
    pending_labels_.clear();
    while (!is_punct("}")) {
      if (at_eof()) fail("unterminated function body");
      f.blocks.push_back(block());
    }
    if (f.blocks.empty()) fail("function " + f.name + " needs at least one block");
    expect_punct("}");
    for (const auto& pl : pending_labels_) {
      auto id = f.find_block(pl.label);
      if (!id) throw ParseFailure{pl.span, "unknown block label " + pl.label};
      f.blocks[pl.block].terminator.targets[pl.index] = *id;
    }
    fn_ = nullptr;
    return f;
  }

  void declare(const Token& name, const Sort& s) {
    if (fn_->find_local(name.text)) throw ParseFailure{name.span, "duplicate local " + name.text};
    fn_->locals.push_back(Local{name.text, s, name.span});
  }

  Block block() {
    Block b;
    b.span = cur().span;
    Token label = ident("block label");
    b.label = label.text;
    for (const auto& blk : fn_->blocks) {
      if (blk.label == label.text) throw ParseFailure{label.span, "duplicate block label " + label.text};
    }
    expect_punct(":");
    for (;;) {
      if (at_eof()) fail("unterminated block " + b.label);
      if (is_word("goto") || is_word("br") || is_word("ret") || is_word("panic") || is_word("unreachable")) {
        b.terminator = terminator();
        break;
      }
      if (is_punct("}")) fail("block " + b.label + " lacks a terminator");
      if (cur().kind == Tok::Ident && next_is_punct(":")) fail("block " + b.label + " lacks a terminator");
      b.statements.push_back(statement());
    }
    return b;
  }

  LocalId local_ref(const Token& t) {
    auto id = fn_->find_local(t.text);
    if (!id) throw ParseFailure{t.span, "unknown local " + t.text};
    return *id;
  }

  Operand operand() {
    SourceSpan sp = cur().span;
    if (is_word("true") || is_word("false")) {
      bool v = is_word("true");
      ++pos_;
      return Operand::of_const(Value::boolean(v), sp);
    }
    if (is_punct("(")) {
      ++pos_;
      expect_punct(")");
      return Operand::of_const(Value::unit(), sp);
    }
    if (cur().kind == Tok::Int) {
      u128 v = take().value;
      expect_punct(":");
      Token w = ident("bit-vector sort");
      unsigned width = 0;
      if (!is_bv_sort_word(w.text, &width) || width == 0 || width > kMaxBitWidth) {
        throw ParseFailure{w.span, "expected a bit-vector sort like bv8"};
      }
      if (v > width_mask(width)) throw ParseFailure{sp, "literal does not fit in bv" + std::to_string(width)};
      return Operand::of_const(Value::bitvec(v, width), sp);
    }
    if (cur().kind == Tok::Ident && !keywords().count(cur().text)) {
      Token t = take();
      return Operand::of_local(local_ref(t), sp);
    }
    fail("expected an operand");
  }

  std::vector<Operand> operand_list(std::string_view close) {
    std::vector<Operand> out;
    while (!is_punct(close)) {
      out.push_back(operand());
      if (!is_punct(",")) break;
      ++pos_;
    }
    expect_punct(close);
    return out;
  }

  Sort operand_sort(const Operand& o) {
    return o.kind == Operand::Kind::Local ? fn_->locals[o.local].sort : o.value.sort();
  }

  // Resolve `.name` / `.N` against a tuple, record or variant sort.
  std::size_t member_selector(const Sort& s, Rvalue& rv, bool arm) {
    SourceSpan sp = cur().span;
    expect_punct(".");
    std::string label;
    if (cur().kind == Tok::Int) {
      label = take().text;
    } else {
      label = ident(arm ? "arm name" : "field name").text;
    }
    rv.name = label;
    if (arm) {
      if (s.kind() != SortKind::Variant) throw ParseFailure{sp, "sort " + s.str() + " is not a variant"};
      std::size_t i = s.member_index(label);
      if (i == Sort::npos) throw ParseFailure{sp, "unknown arm " + label + " of " + s.str()};
      return i;
    }
    if (s.kind() == SortKind::Tuple) {
      std::size_t i = 0;
      bool numeric = !label.empty() && std::all_of(label.begin(), label.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
      if (numeric) i = std::stoul(label);
      if (!numeric || i >= s.members().size()) throw ParseFailure{sp, "no field " + label + " in " + s.str()};
      return i;
    }
    if (s.kind() == SortKind::Record) {
      std::size_t i = s.member_index(label);
      if (i == Sort::npos) throw ParseFailure{sp, "unknown field " + label + " of " + s.str()};
      return i;
    }
    throw ParseFailure{sp, "sort " + s.str() + " has no fields"};
  }

  Sort pointee_of(const Operand& o, SourceSpan sp) {
    Sort s = operand_sort(o);
    if (!s.is_ref()) throw ParseFailure{sp, "operand of sort " + s.str() + " is not a reference"};
    return s.elem();
  }

  Rvalue rvalue() {
    Rvalue rv;
    rv.span = cur().span;
    using K = Rvalue::Kind;
    if (cur().kind != Tok::Ident || !keywords().count(cur().text) || is_word("true") || is_word("false")) {
      rv.kind = K::Use;
      rv.args.push_back(operand());
      return rv;
    }
    std::string kw = take().text;
    SourceSpan sp = rv.span;
    if (kw == "zext" || kw == "trunc") {
      rv.kind = K::Prim;
      rv.op = kw == "zext" ? Op::BvZeroExtend : Op::BvTruncate;
      expect_punct("<");
      rv.param = integer("width");
      expect_punct(">");
      rv.args.push_back(operand());
      return rv;
    }
    if (auto op = prim_from_keyword(kw)) {
      rv.kind = K::Prim;
      rv.op = *op;
      rv.args.push_back(operand());
      while (is_punct(",")) {
        ++pos_;
        rv.args.push_back(operand());
      }
      return rv;
    }
    if (kw.rfind("checked_", 0) == 0) {
      rv.kind = K::Checked;
      rv.op = *prim_from_keyword(kw.substr(8));
      rv.args.push_back(operand());
      expect_punct(",");
      rv.args.push_back(operand());
      return rv;
    }
    if (kw == "call") {
      rv.kind = K::Call;
      Token callee = ident("function name");
      rv.name = callee.text;
      names_.push_back({callee.text, callee.span, PendingName::Kind::Call});
      expect_punct("(");
      rv.args = operand_list(")");
      return rv;
    }
    if (kw == "alloc") {
      rv.kind = K::Alloc;
      rv.sort = sort();
      rv.args.push_back(operand());
      return rv;
    }
    if (kw == "load") {
      rv.kind = K::Load;
      rv.args.push_back(operand());
      return rv;
    }
    if (kw == "field" || kw == "payload" || kw == "is") {
      rv.kind = kw == "field" ? K::Field : kw == "payload" ? K::Payload : K::IsArm;
      rv.args.push_back(operand());
      rv.index = member_selector(operand_sort(rv.args[0]), rv, kw != "field");
      return rv;
    }
    if (kw == "tag") {
      rv.kind = K::Tag;
      rv.args.push_back(operand());
      return rv;
    }
    if (kw == "index" || kw == "update" || kw == "refindex") {
      rv.kind = kw == "index" ? K::Index : kw == "update" ? K::Update : K::RefIndex;
      rv.args.push_back(operand());
      expect_punct("[");
      rv.args.push_back(operand());
      expect_punct("]");
      if (rv.kind == K::Update) {
        expect_punct(",");
        rv.args.push_back(operand());
      }
      return rv;
    }
    if (kw == "reffield" || kw == "refpayload") {
      rv.kind = kw == "reffield" ? K::RefField : K::RefPayload;
      rv.args.push_back(operand());
      Sort pointee = pointee_of(rv.args[0], sp);
      rv.index = member_selector(pointee, rv, kw == "refpayload");
      return rv;
    }
    if (kw == "tuple") {
      rv.kind = K::Tuple;
      expect_punct("(");
      rv.args = operand_list(")");
      return rv;
    }
    if (kw == "mkarray") {
      rv.kind = K::Array;
      expect_punct("[");
      Operand first = operand();
      if (is_punct(";")) {
        ++pos_;
        u128 n = integer("repeat count");
        if (n == 0 || n > 65536) throw ParseFailure{sp, "repeat count must be in 1..65536"};
        expect_punct("]");
        rv.args.assign(static_cast<std::size_t>(n), first);
      } else {
        rv.args.push_back(first);
        while (is_punct(",")) {
          ++pos_;
          rv.args.push_back(operand());
        }
        expect_punct("]");
      }
      return rv;
    }
    if (kw == "record") {
      rv.kind = K::Record;
      Token name = ident("record name");
      const SortDecl* d = prog_->find_sort(name.text);
      if (!d || d->sort.kind() != SortKind::Record) throw ParseFailure{name.span, "unknown record " + name.text};
      rv.sort = d->sort;
      expect_punct("{");
      std::vector<std::optional<Operand>> slots(rv.sort.members().size());
      while (!is_punct("}")) {
        Token fl = ident("field name");
        std::size_t i = rv.sort.member_index(fl.text);
        if (i == Sort::npos) throw ParseFailure{fl.span, "unknown field " + fl.text + " of " + name.text};
        if (slots[i]) throw ParseFailure{fl.span, "field " + fl.text + " given twice"};
        expect_punct(":");
        slots[i] = operand();
        if (!is_punct(",")) break;
        ++pos_;
      }
      expect_punct("}");
      for (std::size_t i = 0; i < slots.size(); ++i) {
        if (!slots[i]) throw ParseFailure{name.span, "missing field " + rv.sort.labels()[i] + " of " + name.text};
        rv.args.push_back(*slots[i]);
      }
      return rv;
    }
    if (kw == "variant") {
      rv.kind = K::Variant;
      Token name = ident("variant name");
      const SortDecl* d = prog_->find_sort(name.text);
      if (!d || d->sort.kind() != SortKind::Variant) throw ParseFailure{name.span, "unknown variant " + name.text};
      rv.sort = d->sort;
      rv.index = member_selector(rv.sort, rv, true);
      expect_punct("(");
      rv.args.push_back(operand());
      expect_punct(")");
      return rv;
    }
    throw ParseFailure{sp, "'" + kw + "' does not start an rvalue"};
  }

  Statement statement() {
    Statement st;
    st.span = cur().span;
    using SK = Statement::Kind;
    if (is_word("store")) {
      ++pos_;
      st.kind = SK::Store;
      st.a = operand();
      expect_punct(",");
      st.b = operand();
      return st;
    }
    if (is_word("assume") || is_word("assert")) {
      st.kind = is_word("assume") ? SK::Assume : SK::Assert;
      ++pos_;
      st.a = operand();
      if (st.kind == SK::Assert && cur().kind == Tok::String) {
        st.text = take().text;
        st.has_message = true;
      }
      return st;
    }
    if (is_word("enable_spec")) {
      ++pos_;
      st.kind = SK::EnableSpec;
      Token t = ident("spec name");
      st.text = t.text;
      names_.push_back({t.text, t.span, PendingName::Kind::Enable});
      return st;
    }
    if (is_word("nop")) {
      ++pos_;
      return st;
    }
    if (cur().kind == Tok::Ident && next_is_punct("=")) {
      Token dest = take();
      st.dest = local_ref(dest);
      ++pos_;  // '='
      if (is_word("symbolic")) {
        ++pos_;
        st.kind = SK::Symbolic;
        st.sort = sort();
        st.text = string_lit("symbol name string");
        return st;
      }
      st.kind = SK::Assign;
      st.rvalue = rvalue();
      return st;
    }
    fail("expected a statement");
  }

  Terminator terminator() {
    Terminator t;
    t.span = cur().span;
    using TK = Terminator::Kind;
    std::string kw = take().text;
    if (kw == "goto") {
      t.kind = TK::Goto;
      t.targets.push_back(0);
      label_ref(t, 0);
    } else if (kw == "br") {
      t.kind = TK::Branch;
      t.value = operand();
      t.targets = {0, 0};
      label_ref(t, 0);
      label_ref(t, 1);
    } else if (kw == "ret") {
      t.kind = TK::Return;
      t.value = operand();
    } else if (kw == "panic") {
      t.kind = TK::Panic;
      t.text = string_lit("panic message");
    } else {
      t.kind = TK::Unreachable;
    }
    return t;
  }

  // Targets are patched once the whole function body is known.
  void label_ref(Terminator&, std::size_t i) {
    Token l = ident("block label");
    pending_labels_.push_back({fn_->blocks.size(), i, l.text, l.span});
  }

  struct LabelFix {
    std::size_t block;
    std::size_t index;
    std::string label;
    SourceSpan span;
  };

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Program* prog_ = nullptr;
  Function* fn_ = nullptr;
  std::vector<PendingName> names_;
  std::vector<LabelFix> pending_labels_;
};

}  // namespace

ParseResult parse(std::string_view text, const std::string& file) {
  ParseResult r;
  try {
    Lexer lex(text, file);
    Parser p(lex.run());
    r.program = p.run();
  } catch (const ParseFailure& e) {
    r.diagnostics.push_back({e.span, e.message});
  }
  return r;
}

bool is_keyword(std::string_view word) { return keywords().count(word) > 0; }

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\t') {
      out += "\\t";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

std::string print_operand(const Function& f, const Operand& o) {
  if (o.kind == Operand::Kind::Local) return f.locals.at(o.local).name;
  const Value& v = o.value;
  switch (v.sort().kind()) {
    case SortKind::Bool: return v.as_bool() ? "true" : "false";
    case SortKind::BitVec: return u128_to_string(v.bits()) + ":bv" + std::to_string(v.width());
    default: return "()";
  }
}

std::string operands(const Function& f, const std::vector<Operand>& ops, std::size_t from = 0) {
  std::string s;
  for (std::size_t i = from; i < ops.size(); ++i) {
    if (i > from) s += ", ";
    s += print_operand(f, ops[i]);
  }
  return s;
}

}  // namespace

std::string print_sort(const Sort& s) {
  switch (s.kind()) {
    case SortKind::Array: return "[" + print_sort(s.elem()) + "; " + std::to_string(s.length()) + "]";
    case SortKind::Tuple: {
      std::string out = "(";
      for (std::size_t i = 0; i < s.members().size(); ++i) {
        if (i) out += ", ";
        out += print_sort(s.members()[i]);
      }
      if (s.members().size() == 1) out += ",";
      return out + ")";
    }
    case SortKind::Reference: return "ref<" + print_sort(s.elem()) + ">";
    default: return s.str();
  }
}

std::string print_rvalue(const Function& f, const Rvalue& rv) {
  using K = Rvalue::Kind;
  auto arg = [&](std::size_t i) { return print_operand(f, rv.args.at(i)); };
  switch (rv.kind) {
    case K::Use: return arg(0);
    case K::Prim:
      if (rv.op == Op::BvZeroExtend || rv.op == Op::BvTruncate) {
        return std::string(prim_keyword(rv.op)) + "<" + u128_to_string(rv.param) + "> " + arg(0);
      }
      return std::string(prim_keyword(rv.op)) + " " + operands(f, rv.args);
    case K::Checked: return "checked_" + std::string(prim_keyword(rv.op)) + " " + operands(f, rv.args);
    case K::Tuple: return "tuple(" + operands(f, rv.args) + ")";
    case K::Array: return "mkarray [" + operands(f, rv.args) + "]";
    case K::Record: {
      std::string s = "record " + rv.sort.name() + " { ";
      for (std::size_t i = 0; i < rv.args.size(); ++i) {
        if (i) s += ", ";
        s += rv.sort.labels()[i] + ": " + arg(i);
      }
      return s + " }";
    }
    case K::Variant: return "variant " + rv.sort.name() + "." + rv.sort.labels()[rv.index] + "(" + arg(0) + ")";
    case K::Field: return "field " + arg(0) + "." + rv.name;
    case K::Payload: return "payload " + arg(0) + "." + rv.name;
    case K::Tag: return "tag " + arg(0);
    case K::IsArm: return "is " + arg(0) + "." + rv.name;
    case K::Index: return "index " + arg(0) + "[" + arg(1) + "]";
    case K::Update: return "update " + arg(0) + "[" + arg(1) + "], " + arg(2);
    case K::Alloc: return "alloc " + print_sort(rv.sort) + " " + arg(0);
    case K::Load: return "load " + arg(0);
    case K::RefField: return "reffield " + arg(0) + "." + rv.name;
    case K::RefIndex: return "refindex " + arg(0) + "[" + arg(1) + "]";
    case K::RefPayload: return "refpayload " + arg(0) + "." + rv.name;
    case K::Call: return "call " + rv.name + "(" + operands(f, rv.args) + ")";
  }
  return "?";
}

std::string print_statement(const Function& f, const Statement& st) {
  using SK = Statement::Kind;
  switch (st.kind) {
    case SK::Assign: return f.locals.at(st.dest).name + " = " + print_rvalue(f, st.rvalue);
    case SK::Store: return "store " + print_operand(f, st.a) + ", " + print_operand(f, st.b);
    case SK::Symbolic: return f.locals.at(st.dest).name + " = symbolic " + print_sort(st.sort) + " " + quote(st.text);
    case SK::Assume: return "assume " + print_operand(f, st.a);
    case SK::Assert: return "assert " + print_operand(f, st.a) + (st.has_message ? " " + quote(st.text) : "");
    case SK::EnableSpec: return "enable_spec " + st.text;
    case SK::Nop: return "nop";
  }
  return "?";
}

std::string print_terminator(const Function& f, const Terminator& t) {
  using TK = Terminator::Kind;
  auto label = [&](std::size_t i) { return f.blocks.at(t.targets.at(i)).label; };
  switch (t.kind) {
    case TK::Goto: return "goto " + label(0);
    case TK::Branch: return "br " + print_operand(f, t.value) + " " + label(0) + " " + label(1);
    case TK::Return: return "ret " + print_operand(f, t.value);
    case TK::Panic: return "panic " + quote(t.text);
    case TK::Unreachable: return "unreachable";
  }
  return "?";
}

std::string print(const Program& p) {
  std::ostringstream os;
  os << "// cruxlite IR\n";
  for (const auto& d : p.sorts) {
    const Sort& s = d.sort;
    bool rec = s.kind() == SortKind::Record;
    os << "\n" << (rec ? "record " : "variant ") << s.name() << " {";
    for (std::size_t i = 0; i < s.members().size(); ++i) {
      os << (i ? ", " : " ") << s.labels()[i];
      if (rec) {
        os << ": " << print_sort(s.members()[i]);
      } else {
        os << "(" << print_sort(s.members()[i]) << ")";
      }
    }
    os << " }\n";
  }
  for (const auto& f : p.functions) {
    os << "\n";
    if (f.is_test) os << "#[test]\n";
    if (f.spec_for) os << "#[spec_for(" << *f.spec_for << ")]\n";
    os << "fn " << f.name << "(";
    for (std::size_t i = 0; i < f.num_params; ++i) {
      if (i) os << ", ";
      os << f.locals[i].name << ": " << print_sort(f.locals[i].sort);
    }
    os << ") -> " << print_sort(f.ret_sort) << " {\n";
    for (std::size_t i = f.num_params; i < f.locals.size(); ++i) {
      os << "  let " << f.locals[i].name << ": " << print_sort(f.locals[i].sort) << "\n";
    }
    for (const auto& b : f.blocks) {
      os << b.label << ":\n";
      for (const auto& st : b.statements) os << "  " << print_statement(f, st) << "\n";
      os << "  " << print_terminator(f, b.terminator) << "\n";
    }
    os << "}\n";
  }
  return os.str();
}

}  // namespace cruxlite
