#include "fse/math_ast.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

#include "fse/errors.hpp"

namespace fse::math {

namespace {

bool is_ascii_letter(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_blank(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}
bool is_operator_char(char c) {
  static constexpr std::string_view ops = "+-*/=<>^_(),.";
  return ops.find(c) != std::string_view::npos;
}

// Length of the UTF-8 sequence starting at a lead byte (1 for malformed input,
// which keeps the lexer total and lossless).
std::size_t utf8_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

}  // namespace

std::vector<Token> tokenize_math(std::string_view src) {
  std::vector<Token> tokens;
  std::vector<std::pair<char, std::size_t>> stack;  // open delimiter, offset
  std::size_t i = 0;
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\\') {
      std::size_t j = i + 1;
      if (j < src.size() && is_ascii_letter(src[j])) {
        while (j < src.size() && is_ascii_letter(src[j])) ++j;
        tokens.push_back({TokenKind::Command, std::string(src.substr(i, j - i)),
                          std::string(src.substr(i + 1, j - i - 1)), i});
      } else if (j < src.size()) {
        std::size_t n = utf8_len(static_cast<unsigned char>(src[j]));
        n = std::min(n, src.size() - j);
        tokens.push_back({TokenKind::Command, std::string(src.substr(i, 1 + n)),
                          std::string(src.substr(j, n)), i});
        j += n;
      } else {
        // trailing lone backslash
        tokens.push_back({TokenKind::Other, "\\", "\\", i});
        j = i + 1;
      }
      i = j;
      continue;
    }
    if (c == '{' || c == '[') {
      stack.emplace_back(c, i);
      tokens.push_back({c == '{' ? TokenKind::LBrace : TokenKind::LBracket,
                        std::string(1, c), std::string(1, c), i});
      ++i;
      continue;
    }
    if (c == '}' || c == ']') {
      const char open = (c == '}') ? '{' : '[';
      if (stack.empty() || stack.back().first != open)
        throw UnbalancedDelimiter(std::string("unmatched '") + c + "'", i);
      stack.pop_back();
      tokens.push_back({c == '}' ? TokenKind::RBrace : TokenKind::RBracket,
                        std::string(1, c), std::string(1, c), i});
      ++i;
      continue;
    }
    if (is_blank(c)) {
      std::size_t j = i;
      while (j < src.size() && is_blank(src[j])) ++j;
      tokens.push_back({TokenKind::Whitespace, std::string(src.substr(i, j - i)),
                        " ", i});
      i = j;
      continue;
    }
    if (is_digit(c)) {
      tokens.push_back({TokenKind::Digit, std::string(1, c), std::string(1, c), i});
      ++i;
      continue;
    }
    if (is_ascii_letter(c)) {
      tokens.push_back({TokenKind::Letter, std::string(1, c), std::string(1, c), i});
      ++i;
      continue;
    }
    if (is_operator_char(c)) {
      tokens.push_back({TokenKind::Operator, std::string(1, c), std::string(1, c), i});
      ++i;
      continue;
    }
    std::size_t n = utf8_len(static_cast<unsigned char>(c));
    n = std::min(n, src.size() - i);
    tokens.push_back({TokenKind::Other, std::string(src.substr(i, n)),
                      std::string(src.substr(i, n)), i});
    i += n;
  }
  if (!stack.empty())
    throw UnbalancedDelimiter(std::string("unclosed '") + stack.back().first + "'",
                              stack.back().second);
  return tokens;
}

MathAst MathAst::number(std::string digits) {
  return {NodeKind::Number, std::move(digits), {}};
}
MathAst MathAst::symbol(std::string s) { return {NodeKind::Symbol, std::move(s), {}}; }
MathAst MathAst::op(std::string o) { return {NodeKind::Operator, std::move(o), {}}; }
MathAst MathAst::op1(std::string o, MathAst child) {
  return {NodeKind::Operator, std::move(o), {std::move(child)}};
}
MathAst MathAst::op2(std::string o, MathAst lhs, MathAst rhs) {
  return {NodeKind::Operator, std::move(o), {std::move(lhs), std::move(rhs)}};
}
MathAst MathAst::fn(std::string name, std::vector<MathAst> args) {
  return {NodeKind::Function, std::move(name), std::move(args)};
}
MathAst MathAst::juxt(std::vector<MathAst> members) {
  if (members.size() == 1) return std::move(members.front());
  return {NodeKind::Group, "juxt", std::move(members)};
}
MathAst MathAst::paren(std::vector<MathAst> members) {
  return {NodeKind::Group, "paren", std::move(members)};
}

namespace {

// Parser working token: whitespace dropped, spacing commands dropped, and
// source-adjacent digit runs (with an optional interior or leading decimal
// point) merged into one number.
struct PTok {
  TokenKind kind;
  std::string text;       // merged payload
  std::size_t raw_index;  // index into the raw token vector, for errors
};

// TeX spacing escapes carry no content.
bool is_spacing_command(const std::string& payload) {
  return payload == "," || payload == ";" || payload == ":" || payload == "!" ||
         payload == " " || payload == "\\";
}

// Escaped specials map to named zero-argument functions so the canonical
// form never re-introduces delimiter bytes.
const std::map<std::string, std::string>& escaped_special_names() {
  static const std::map<std::string, std::string> m = {
      {"{", "lbrace"}, {"}", "rbrace"},     {"$", "dollar"},
      {"%", "percent"}, {"&", "amp"},       {"#", "hash"},
      {"_", "underscore"}, {"|", "vert"},
  };
  return m;
}

std::vector<PTok> preprocess(const std::vector<Token>& raw) {
  std::vector<PTok> out;
  const auto adjacent = [&](std::size_t a, std::size_t b) {
    return raw[a].offset + raw[a].lexeme.size() == raw[b].offset;
  };
  for (std::size_t i = 0; i < raw.size();) {
    const Token& t = raw[i];
    if (t.kind == TokenKind::Whitespace) {
      ++i;
      continue;
    }
    if (t.kind == TokenKind::Command && is_spacing_command(t.payload)) {
      ++i;
      continue;
    }
    const bool starts_number =
        t.kind == TokenKind::Digit ||
        (t.kind == TokenKind::Operator && t.payload == "." && i + 1 < raw.size() &&
         raw[i + 1].kind == TokenKind::Digit && adjacent(i, i + 1));
    if (starts_number) {
      std::string text;
      std::size_t first = i;
      bool seen_dot = false;
      std::size_t j = i;
      while (j < raw.size()) {
        if (raw[j].kind == TokenKind::Digit) {
          text += raw[j].payload;
        } else if (raw[j].kind == TokenKind::Operator && raw[j].payload == "." &&
                   !seen_dot && j + 1 < raw.size() &&
                   raw[j + 1].kind == TokenKind::Digit && adjacent(j, j + 1)) {
          seen_dot = true;
          text += '.';
        } else {
          break;
        }
        ++j;
        if (j < raw.size() && !adjacent(j - 1, j)) break;
      }
      out.push_back({TokenKind::Digit, std::move(text), first});
      i = j;
      continue;
    }
    if (t.kind == TokenKind::Operator && t.payload == ".") {
      // lone dot: plain symbol, no grammar role
      out.push_back({TokenKind::Other, ".", i});
      ++i;
      continue;
    }
    out.push_back({t.kind, t.payload, i});
    ++i;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<PTok> toks) : toks_(std::move(toks)) {}

  MathAst parse_top() {
    if (toks_.empty()) return MathAst::juxt({});
    MathAst list = parse_expr_list(true);
    if (!at_end()) fail("end of formula");
    return list;
  }

 private:
  std::vector<PTok> toks_;
  std::size_t pos_ = 0;

  bool at_end() const { return pos_ >= toks_.size(); }
  const PTok& peek() const { return toks_[pos_]; }
  const PTok& advance() { return toks_[pos_++]; }

  bool peek_is(TokenKind k) const { return !at_end() && peek().kind == k; }
  bool peek_op(std::string_view o) const {
    return peek_is(TokenKind::Operator) && peek().text == o;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    std::size_t idx = at_end() ? (toks_.empty() ? 0 : toks_.back().raw_index + 1)
                               : peek().raw_index;
    throw ParseError("cannot parse formula", idx, expected);
  }

  bool at_closer() const {
    if (at_end()) return true;
    if (peek().kind == TokenKind::RBrace || peek().kind == TokenKind::RBracket)
      return true;
    return peek_op(")");
  }

  // expr (',' expr)*; at top level a multi-element list prints bare,
  // inside parens it prints as (...).
  MathAst parse_expr_list(bool top_level) {
    std::vector<MathAst> items;
    if (at_closer()) {
      // empty list: () from zero-argument opaque functions
      return top_level ? MathAst::juxt({}) : MathAst::paren({});
    }
    items.push_back(parse_expr());
    while (peek_op(",")) {
      advance();
      items.push_back(parse_expr());
    }
    if (items.size() == 1 && top_level) return std::move(items.front());
    if (top_level) return {NodeKind::Group, "list", std::move(items)};
    return MathAst::paren(std::move(items));
  }

  MathAst parse_expr() { return parse_relation(); }

  MathAst parse_relation() {
    MathAst lhs = parse_sum();
    while (peek_op("=") || peek_op("<") || peek_op(">")) {
      std::string o = advance().text;
      lhs = MathAst::op2(std::move(o), std::move(lhs), parse_sum());
    }
    return lhs;
  }

  MathAst parse_sum() {
    MathAst lhs = parse_term();
    while (peek_op("+") || peek_op("-")) {
      std::string o = advance().text;
      lhs = MathAst::op2(std::move(o), std::move(lhs), parse_term());
    }
    return lhs;
  }

  MathAst parse_term() {
    MathAst lhs = parse_factor();
    while (peek_op("*") || peek_op("/")) {
      std::string o = advance().text;
      lhs = MathAst::op2(std::move(o), std::move(lhs), parse_factor());
    }
    return lhs;
  }

  MathAst parse_factor() {
    if (peek_op("+") || peek_op("-")) {
      std::string o = advance().text;
      return MathAst::op1(std::move(o), parse_factor());
    }
    return parse_juxt();
  }

  bool starts_primary() const {
    if (at_end()) return false;
    switch (peek().kind) {
      case TokenKind::Digit:
      case TokenKind::Letter:
      case TokenKind::Other:
      case TokenKind::Command:
      case TokenKind::LBrace:
      case TokenKind::LBracket:
        return true;
      case TokenKind::Operator:
        return peek().text == "(";
      default:
        return false;
    }
  }

  MathAst parse_juxt() {
    std::vector<MathAst> members;
    members.push_back(parse_postfix());
    while (starts_primary()) members.push_back(parse_postfix());
    return MathAst::juxt(std::move(members));
  }

  MathAst parse_postfix() {
    MathAst base = parse_primary();
    while (peek_op("^") || peek_op("_")) {
      const bool sup = advance().text == "^";
      MathAst arg = parse_command_arg();  // braces group the argument, TeX style
      base = MathAst::fn(sup ? "pow" : "sub", {std::move(base), std::move(arg)});
    }
    return base;
  }

  MathAst parse_primary() {
    if (at_end()) fail("number, symbol, group, or command");
    const PTok& t = peek();
    switch (t.kind) {
      case TokenKind::Digit:
        return MathAst::number(advance().text);
      case TokenKind::Letter:
      case TokenKind::Other:
        return MathAst::symbol(advance().text);
      case TokenKind::LBrace: {
        advance();
        MathAst inner = parse_braced_list();
        expect(TokenKind::RBrace, "'}'");
        return inner;
      }
      case TokenKind::LBracket: {
        advance();
        MathAst inner = parse_braced_list();
        expect(TokenKind::RBracket, "']'");
        return inner;
      }
      case TokenKind::Operator:
        if (t.text == "(") {
          advance();
          MathAst inner = parse_expr_list(false);
          if (!peek_op(")")) fail("')'");
          advance();
          return inner;
        }
        fail("number, symbol, group, or command");
      case TokenKind::Command:
        return parse_command();
      default:
        fail("number, symbol, group, or command");
    }
  }

  // Brace/bracket group content; always prints parenthesized.
  MathAst parse_braced_list() {
    std::vector<MathAst> items;
    if (at_closer()) return MathAst::paren({});
    items.push_back(parse_expr());
    while (peek_op(",")) {
      advance();
      items.push_back(parse_expr());
    }
    return MathAst::paren(std::move(items));
  }

  void expect(TokenKind k, const std::string& what) {
    if (!peek_is(k)) fail(what);
    advance();
  }

  // A command argument: braced group (unwrapped when it holds one
  // expression) or a single following primary, TeX style.
  MathAst parse_command_arg() {
    if (peek_is(TokenKind::LBrace)) {
      advance();
      std::vector<MathAst> items;
      if (!peek_is(TokenKind::RBrace)) {
        items.push_back(parse_expr());
        while (peek_op(",")) {
          advance();
          items.push_back(parse_expr());
        }
      }
      expect(TokenKind::RBrace, "'}'");
      if (items.size() == 1) return std::move(items.front());
      return MathAst::paren(std::move(items));
    }
    return parse_primary();
  }

  // Wrapper argument (\text{...} etc): a raw atom sequence. Punctuation that
  // has grammar roles elsewhere is kept as a bare operator atom here, which
  // is what lets `\text{-}` re-enter the surrounding formula as a minus.
  MathAst parse_verbatim_arg() {
    if (!peek_is(TokenKind::LBrace)) return parse_verbatim_atom();
    advance();
    std::vector<MathAst> members;
    while (!peek_is(TokenKind::RBrace)) {
      if (at_end()) fail("'}'");
      members.push_back(parse_verbatim_atom());
    }
    advance();
    return MathAst::juxt(std::move(members));
  }

  MathAst parse_verbatim_atom() {
    if (at_end()) fail("wrapper content");
    const PTok& t = peek();
    switch (t.kind) {
      case TokenKind::Digit:
        return MathAst::number(advance().text);
      case TokenKind::Letter:
      case TokenKind::Other:
        return MathAst::symbol(advance().text);
      case TokenKind::Operator:
        return MathAst::op(advance().text);
      case TokenKind::LBrace:
        return parse_verbatim_arg();
      case TokenKind::LBracket: {
        advance();
        std::vector<MathAst> members;
        while (!peek_is(TokenKind::RBracket)) {
          if (at_end()) fail("']'");
          members.push_back(parse_verbatim_atom());
        }
        advance();
        return MathAst::juxt(std::move(members));
      }
      case TokenKind::Command:
        return parse_command();
      default:
        fail("wrapper content");
    }
  }

  MathAst parse_command() {
    const PTok tok = advance();
    const std::string& name = tok.text;
    if (name == "sqrt") {
      MathAst index = MathAst::number("2");
      if (peek_is(TokenKind::LBracket)) {
        advance();
        index = parse_expr();
        expect(TokenKind::RBracket, "']'");
      }
      MathAst radicand = parse_command_arg();
      return MathAst::fn("root", {std::move(radicand), std::move(index)});
    }
    if (name == "frac") {
      MathAst num = parse_command_arg();
      MathAst den = parse_command_arg();
      return MathAst::fn("frac", {std::move(num), std::move(den)});
    }
    if (name == "mathrm" || name == "text" || name == "textit") {
      MathAst arg = parse_verbatim_arg();
      return MathAst::fn(name, {std::move(arg)});
    }
    if (!name.empty() && !is_ascii_letter(name[0])) {
      auto it = escaped_special_names().find(name);
      if (it != escaped_special_names().end()) return MathAst::fn(it->second, {});
      return MathAst::symbol(name);  // escaped UTF-8 char: keep the char
    }
    // opaque command: consume the brace groups that follow as arguments
    std::vector<MathAst> args;
    while (peek_is(TokenKind::LBrace)) args.push_back(parse_command_arg());
    return MathAst::fn(name, std::move(args));
  }
};

bool is_wrapper(const MathAst& n) {
  return n.kind == NodeKind::Function &&
         (n.payload == "mathrm" || n.payload == "text" || n.payload == "textit");
}

}  // namespace

MathAst parse_math(const std::vector<Token>& tokens) {
  Parser p(preprocess(tokens));
  return p.parse_top();
}

MathAst rewrite_ast(const MathAst& ast) {
  MathAst out;
  out.kind = ast.kind;
  out.payload = ast.payload;
  out.children.reserve(ast.children.size());
  for (const MathAst& c : ast.children) {
    MathAst r = rewrite_ast(c);
    if (ast.kind == NodeKind::Group && ast.payload == "juxt" &&
        r.kind == NodeKind::Group && r.payload == "juxt") {
      // splice unwrapped content into the surrounding juxtaposition
      for (MathAst& g : r.children) out.children.push_back(std::move(g));
    } else {
      out.children.push_back(std::move(r));
    }
  }
  if (is_wrapper(out)) {
    if (out.children.size() == 1) return std::move(out.children.front());
    return MathAst::juxt(std::move(out.children));
  }
  // a single-member juxt created by splicing collapses to the member
  if (out.kind == NodeKind::Group && out.payload == "juxt" &&
      out.children.size() == 1)
    return std::move(out.children.front());
  return out;
}

namespace {

void serialize_into(const MathAst& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Symbol:
      out += n.payload;
      return;
    case NodeKind::Operator:
      if (n.children.empty()) {
        out += n.payload;
      } else if (n.children.size() == 1) {
        out += n.payload;
        serialize_into(n.children[0], out);
      } else {
        serialize_into(n.children[0], out);
        out += n.payload;
        serialize_into(n.children[1], out);
      }
      return;
    case NodeKind::Function: {
      out += n.payload;
      out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ',';
        serialize_into(n.children[i], out);
      }
      out += ')';
      return;
    }
    case NodeKind::Group: {
      const bool paren = n.payload == "paren";
      const bool list = n.payload == "list";
      if (paren) out += '(';
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i && (paren || list)) out += ',';
        serialize_into(n.children[i], out);
      }
      if (paren) out += ')';
      return;
    }
  }
}

}  // namespace

std::string serialize_canonical(const MathAst& ast) {
  std::string out;
  serialize_into(ast, out);
  return out;
}

std::string canonicalize_formula(std::string_view src) {
  return serialize_canonical(rewrite_ast(parse_math(tokenize_math(src))));
}

}  // namespace fse::math
