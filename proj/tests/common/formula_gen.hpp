#pragma once

// Random LaTeX-ish formula generator used by the normalizer property tests
// and the acceptance suite. Emits strings drawn from the grammar the parser
// accepts, with presentation noise (spaces, \mathrm, \text{-}, brace groups)
// sprinkled in.

#include <string>

#include "fse/rng.hpp"

namespace fse_test {

class FormulaGen {
 public:
  explicit FormulaGen(fse::Rng& rng) : rng_(rng) {}

  std::string formula() { return expr(3); }

 private:
  fse::Rng& rng_;

  std::string maybe_space() { return rng_.bernoulli(0.15) ? " " : ""; }

  std::string letter() {
    static const char* pool = "abcdfkmnpqrstuvwxyz";
    return std::string(1, pool[rng_.bounded(19)]);
  }

  std::string number() {
    std::string s = std::to_string(1 + rng_.bounded(99));
    if (rng_.bernoulli(0.15)) s += "." + std::to_string(rng_.bounded(10));
    return s;
  }

  std::string atom(int depth) {
    switch (rng_.bounded(depth > 0 ? 8 : 3)) {
      case 0:
        return number();
      case 1:
      case 2:
        return rng_.bernoulli(0.2) ? "\\mathrm{" + letter() + "}" : letter();
      case 3:
        return "\\sqrt" +
               (rng_.bernoulli(0.5) ? "[" + expr(depth - 1) + "]" : std::string()) +
               "{" + expr(depth - 1) + "}";
      case 4:
        return "\\frac{" + expr(depth - 1) + "}{" + expr(depth - 1) + "}";
      case 5:
        return "(" + expr(depth - 1) + ")";
      case 6:
        return "{" + expr(depth - 1) + "}";
      default:
        return letter() + (rng_.bernoulli(0.5) ? "^" : "_") +
               (rng_.bernoulli(0.5) ? number().substr(0, 1)
                                    : "{" + expr(depth - 1) + "}");
    }
  }

  std::string juxt(int depth) {
    std::string s = atom(depth);
    const std::uint64_t extra = rng_.bounded(3);
    for (std::uint64_t i = 0; i < extra; ++i) s += maybe_space() + atom(depth);
    return s;
  }

  std::string expr(int depth) {
    std::string s = juxt(depth);
    const std::uint64_t terms = rng_.bounded(3);
    for (std::uint64_t i = 0; i < terms; ++i) {
      const char* op;
      switch (rng_.bounded(4)) {
        case 0:
          op = "+";
          break;
        case 1:
          // the Table-1 style of writing a minus as wrapped text
          op = rng_.bernoulli(0.3) ? "\\text{-}" : "-";
          break;
        case 2:
          op = "*";
          break;
        default:
          op = rng_.bernoulli(0.5) ? "=" : "/";
          break;
      }
      s += maybe_space() + op + maybe_space() + juxt(depth);
    }
    return s;
  }
};

}  // namespace fse_test
