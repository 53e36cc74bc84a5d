#include "fse/normalizer.hpp"

#include <doctest.h>

#include <string>

#include "../common/formula_gen.hpp"
#include "fse/errors.hpp"
#include "fse/rng.hpp"

using namespace fse;

namespace {

// Table-1 exercise variants: E1 plain, E2 with text-wrapped hyphens, E3 with
// mathrm-wrapped symbols on top. All three must normalize byte-identically.
const std::string kE1 =
    "If  $ \\sqrt[3x-10]{2x+y-5}$ and $ \\sqrt{x-3y+11}$  are homogeneous "
    "quadratic radicals,find the values of x and y.";
const std::string kE2 =
    "If $ \\sqrt[3x\\text{-}10]{2x+y\\text{-}5}$ and $ \\sqrt{x "
    "\\text{-}3y+11}$ are homogeneous quadratic radicals, find the values of "
    "x and y.";
const std::string kE3 =
    "If $ \\sqrt[3x\\text{-}10]{2\\mathrm{x}+\\mathrm{y}  \\text{-}5}$ and $ "
    "\\sqrt{\\mathrm{x}\\text{-}3 \\mathrm{y}+11}$ are homogeneous quadratic "
    "radicals, find the values of x and y.";
const std::string kCanonicalE =
    "If $root(2x+y-5,3x-10)$ and $root(x-3y+11,2)$ are homogeneous quadratic "
    "radicals, find the values of x and y.";

CanonicalText norm(const std::string& s, const TermTable& t = {},
                   NormalizeOptions opt = {}) {
  return normalize_exercise(RawExerciseText{s}, t, opt);
}

}  // namespace

TEST_SUITE_BEGIN("normalizer");

TEST_CASE("golden: the three table variants collapse to one form") {
  CHECK(norm(kE1).text == kCanonicalE);
  CHECK(norm(kE2).text == kCanonicalE);
  CHECK(norm(kE3).text == kCanonicalE);
}

TEST_CASE("math spans mark canonical formula interiors") {
  auto c = norm(kE1);
  REQUIRE(c.math_spans.size() == 2);
  CHECK(c.text.substr(c.math_spans[0].offset, c.math_spans[0].length) ==
        "root(2x+y-5,3x-10)");
  CHECK(c.text.substr(c.math_spans[1].offset, c.math_spans[1].length) ==
        "root(x-3y+11,2)");
  CHECK(c.fallback_spans.empty());
  // non-overlapping, ascending, in bounds
  std::size_t prev_end = 0;
  for (const auto& s : c.math_spans) {
    CHECK(s.offset >= prev_end);
    CHECK(s.offset + s.length <= c.text.size());
    prev_end = s.offset + s.length;
  }
}

TEST_CASE("plain prose passes through") {
  CHECK(norm("Find the area of the triangle.").text ==
        "Find the area of the triangle.");
}

TEST_CASE("idempotence on the goldens") {
  for (const auto* e : {&kE1, &kE2, &kE3}) {
    auto once = norm(*e);
    auto twice = norm(once.text);
    CHECK(twice.text == once.text);
    CHECK(twice.math_spans == once.math_spans);
  }
}

TEST_CASE("html tags drop, br becomes a space, nbsp decodes") {
  CHECK(norm("<p>Solve <b>this</b>.</p>").text == "Solve this.");
  CHECK(norm("a<br>b").text == "a b");
  CHECK(norm("a<br/>b").text == "a b");
  CHECK(norm("a&nbsp;b").text == "a b");
  CHECK(norm("<span style=\"color:red\">x</span>").text == "x");
  CHECK(norm("<style>.a{color:red}</style>body").text == "body");
}

TEST_CASE("literal angle brackets in prose survive") {
  CHECK(norm("for 3 < 4 and x > y").text == "for 3 < 4 and x > y");
}

TEST_CASE("whitespace collapses and punctuation spacing unifies") {
  CHECK(norm("radicals,find the   values").text == "radicals, find the values");
  CHECK(norm("radicals, find").text == "radicals, find");
  CHECK(norm("about 1,000 items at ratio 3:5").text ==
        "about 1,000 items at ratio 3:5");
}

TEST_CASE("term table replaces via longest match") {
  auto terms = TermTable::from_pairs({{"quadratic surd", "quadratic radical"},
                                      {"surd", "radical"}});
  CHECK(norm("a quadratic surd and a surd", terms).text ==
        "a quadratic radical and a radical");
}

TEST_CASE("term table values must be fixed points") {
  CHECK_THROWS_AS(TermTable::from_pairs({{"a", "b"}, {"b", "c"}}), DataError);
}

TEST_CASE("terms apply to prose, not formulas") {
  auto terms = TermTable::from_pairs({{"x", "y"}});
  CHECK(norm("x is $x$", terms).text == "y is $x$");
}

TEST_CASE("strict mode throws on bad math, lenient keeps it flagged") {
  const std::string bad = "see $\\frac{1}$ here";
  CHECK_THROWS_AS(norm(bad), NormalizationError);
  auto c = norm(bad, {}, NormalizeOptions{.lenient = true});
  CHECK(c.text == "see $\\frac{1}$ here");
  REQUIRE(c.fallback_spans.size() == 1);
  const auto& span = c.math_spans[c.fallback_spans[0]];
  CHECK(c.text.substr(span.offset, span.length) == "\\frac{1}");
}

TEST_CASE("unterminated math segment") {
  CHECK_THROWS_AS(norm("cost is $5"), NormalizationError);
  auto c = norm("cost is $5", {}, NormalizeOptions{.lenient = true});
  CHECK(c.text == "cost is $5");
  CHECK(c.fallback_spans.size() == 1);
}

TEST_CASE("empty math segment stays empty") {
  CHECK(norm("a $$ b").text == "a $$ b");
}

TEST_CASE("determinism: identical runs give identical bytes") {
  auto a = norm(kE3);
  auto b = norm(kE3);
  CHECK(a == b);
}

TEST_CASE("property: idempotence on randomized formula-bearing texts") {
  Rng rng(99);
  fse_test::FormulaGen gen(rng);
  auto terms = TermTable::from_pairs({{"surd", "radical"}});
  for (int i = 0; i < 200; ++i) {
    std::string text = "Given  $" + gen.formula() + "$ find <b>the</b> surd,ok";
    auto once = normalize_exercise(RawExerciseText{text}, terms, {});
    auto twice = normalize_exercise(RawExerciseText{once.text}, terms, {});
    CHECK(twice.text == once.text);
  }
}

TEST_SUITE_END();
