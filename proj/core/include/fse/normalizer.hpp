#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fse {

struct RawExerciseText {
  std::string text;
};

struct MathSpan {
  std::size_t offset = 0;
  std::size_t length = 0;
  bool operator==(const MathSpan&) const = default;
};

// Normalized exercise text. Formulas stay wrapped in `$...$`; math_spans mark
// the canonical interiors (ascending, non-overlapping, in bounds).
// fallback_spans indexes the spans kept verbatim under lenient mode.
struct CanonicalText {
  std::string text;
  std::vector<MathSpan> math_spans;
  std::vector<std::size_t> fallback_spans;

  bool operator==(const CanonicalText&) const = default;
};

// Two-column UTF-8 TSV of surface term -> canonical term. Longest-match,
// case-sensitive, applied to prose only. Canonical values are required to be
// fixed points of the whole prose pipeline so normalization stays idempotent.
class TermTable {
 public:
  TermTable() = default;
  static TermTable load_tsv(const std::filesystem::path& path);
  static TermTable from_pairs(std::vector<std::pair<std::string, std::string>> pairs);

  std::string apply(const std::string& prose) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  void finalize();
  // sorted by (key length desc, key asc); first-byte index for the scan
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::vector<std::size_t>> by_first_byte_ =
      std::vector<std::vector<std::size_t>>(256);
};

struct NormalizeOptions {
  bool lenient = false;  // keep unparseable math spans verbatim instead of throwing
};

// Drops tags, keeps inner text; <br> variants become a single space;
// <style>/<script> element content is dropped; `&nbsp;` decodes to a space.
// A '<' not opening a plausible tag is literal text.
std::string strip_html(std::string_view in);

// Whitespace-run collapse, trim, and a single space after `,;?!:` when a
// letter follows directly (digits untouched, so "1,000" and "3:5" survive).
std::string canonicalize_prose_whitespace(std::string_view in);

// Full §-by-§ normalization of one raw text: split on `$`, canonicalize each
// formula, strip markup and unify terms in the prose between. Idempotent:
// normalizing a CanonicalText's own text reproduces it byte for byte.
CanonicalText normalize_exercise(const RawExerciseText& raw, const TermTable& terms,
                                 const NormalizeOptions& opt = {});

}  // namespace fse
