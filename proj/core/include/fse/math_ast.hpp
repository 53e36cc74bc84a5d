#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fse::math {

enum class TokenKind {
  Command,     // \sqrt, \frac, ... ; payload is the name without backslash
  LBrace,      // {
  RBrace,      // }
  LBracket,    // [
  RBracket,    // ]
  Digit,       // single decimal digit
  Letter,      // single ASCII letter
  Operator,    // + - * / = < > ^ _ ( ) , .
  Whitespace,  // run of blanks, skipped by the parser
  Other,       // any other character (one UTF-8 code point)
};

struct Token {
  TokenKind kind;
  std::string lexeme;   // exact source bytes; concatenating lexemes rebuilds src
  std::string payload;  // command name or the character itself
  std::size_t offset;   // byte offset into src
};

// Lexes the interior of one `$...$` segment. Lossless: concatenated lexemes
// reproduce src byte for byte. Unknown commands are not an error here; they
// become Command tokens resolved later. Throws UnbalancedDelimiter when `{`/`[`
// nesting does not close.
std::vector<Token> tokenize_math(std::string_view src);

enum class NodeKind { Number, Symbol, Operator, Function, Group };

// Group payloads: "juxt" concatenates children (implicit multiplication),
// "paren" prints a parenthesized comma list, "list" a bare comma list
// (top level of a formula only).
struct MathAst {
  NodeKind kind = NodeKind::Group;
  std::string payload = "juxt";
  std::vector<MathAst> children;

  bool operator==(const MathAst&) const = default;

  static MathAst number(std::string digits);
  static MathAst symbol(std::string s);
  static MathAst op(std::string o);
  static MathAst op1(std::string o, MathAst child);
  static MathAst op2(std::string o, MathAst lhs, MathAst rhs);
  static MathAst fn(std::string name, std::vector<MathAst> args);
  static MathAst juxt(std::vector<MathAst> members);
  static MathAst paren(std::vector<MathAst> members);
};

// Recursive-descent parse of a token list. Precedence, loosest first:
// comma list, relations (= < >), sum (+ -), product (* /), juxtaposition,
// superscript/subscript, atoms. `\sqrt[i]{r}` becomes root(r, i) with i
// defaulting to 2; `\frac{a}{b}` becomes frac(a, b); `^`/`_` become pow/sub.
// \mathrm, \text and \textit parse to wrapper nodes whose argument is read
// as a raw atom sequence, so content like `\text{-}` stays representable.
// Any other command is an opaque function taking the brace groups that
// follow it. Throws ParseError with the offending token index.
MathAst parse_math(const std::vector<Token>& tokens);

// Removes presentation wrappers (mathrm, text, textit) bottom-up, splicing
// their content into the surrounding node and flattening nested
// juxtapositions. Total: never throws, and one pass reaches the fixed point.
MathAst rewrite_ast(const MathAst& ast);

// Deterministic canonical form: prefix functions with comma-separated
// arguments and no whitespace, e.g. root(2x+y-5,3x-10). Operators print
// infix; juxtaposition concatenates; groups print as (...).
std::string serialize_canonical(const MathAst& ast);

// tokenize + parse + rewrite + serialize for one formula interior.
std::string canonicalize_formula(std::string_view src);

}  // namespace fse::math
