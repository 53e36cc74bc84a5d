#include "fse/normalizer.hpp"

#include <algorithm>
#include <cctype>

#include "fse/errors.hpp"
#include "fse/io.hpp"
#include "fse/math_ast.hpp"

namespace fse {

namespace {

bool is_blank(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}
bool is_ascii_letter(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (lower(a[i]) != lower(b[i])) return false;
  return true;
}

// Tag name at `pos` (just past '<' or '</'). Empty when not a name.
std::string_view tag_name(std::string_view in, std::size_t pos) {
  std::size_t end = pos;
  while (end < in.size() && is_ascii_letter(in[end])) ++end;
  return in.substr(pos, end - pos);
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i)
    if (iequals(hay.substr(i, needle.size()), needle)) return i;
  return std::string_view::npos;
}

}  // namespace

std::string strip_html(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const char c = in[i];
    if (c == '&' && in.substr(i, 6) == "&nbsp;") {
      out += ' ';
      i += 6;
      continue;
    }
    if (c != '<') {
      out += c;
      ++i;
      continue;
    }
    const bool plausible =
        i + 1 < in.size() &&
        (is_ascii_letter(in[i + 1]) || in[i + 1] == '/' || in[i + 1] == '!');
    if (!plausible) {
      out += c;
      ++i;
      continue;
    }
    const std::size_t close = in.find('>', i);
    if (close == std::string_view::npos) {
      out += c;  // no closing '>': literal
      ++i;
      continue;
    }
    const std::size_t name_pos = (in[i + 1] == '/') ? i + 2 : i + 1;
    const std::string_view name = tag_name(in, name_pos);
    if (iequals(name, "br")) out += ' ';
    if (in[i + 1] != '/' && (iequals(name, "style") || iequals(name, "script"))) {
      const std::string closer = iequals(name, "style") ? "</style>" : "</script>";
      const std::size_t end = find_ci(in, closer, close + 1);
      if (end != std::string_view::npos) {
        i = end + closer.size();
        continue;
      }
    }
    i = close + 1;
  }
  return out;
}

namespace {

// keep_boundary_space: a leading/trailing blank run survives as one space
// (needed for prose pieces that sit between formulas).
std::string collapse_ws(std::string_view in, bool keep_boundary_space) {
  std::string out;
  out.reserve(in.size());
  bool pending = false;
  bool any = false;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (is_blank(c)) {
      pending = true;
      continue;
    }
    if (pending && (any || keep_boundary_space)) out += ' ';
    pending = false;
    any = true;
    out += c;
    if ((c == ',' || c == ';' || c == '?' || c == '!' || c == ':') &&
        i + 1 < in.size() && is_ascii_letter(in[i + 1]))
      out += ' ';
  }
  if (pending && (any || keep_boundary_space)) out += ' ';
  return out;
}

}  // namespace

std::string canonicalize_prose_whitespace(std::string_view in) {
  std::string out = collapse_ws(in, false);
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

TermTable TermTable::load_tsv(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> pairs;
  io::for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    if (line.empty()) return;
    auto cols = io::split_tsv(line);
    if (cols.size() != 2)
      throw SchemaError("term table row needs exactly 2 tab-separated columns", lineno);
    if (cols[0].empty()) throw SchemaError("empty surface term", lineno);
    pairs.emplace_back(std::move(cols[0]), std::move(cols[1]));
  });
  return from_pairs(std::move(pairs));
}

TermTable TermTable::from_pairs(std::vector<std::pair<std::string, std::string>> pairs) {
  TermTable t;
  t.entries_ = std::move(pairs);
  t.finalize();
  return t;
}

void TermTable::finalize() {
  std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
    if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
    return a.first < b.first;
  });
  entries_.erase(std::unique(entries_.begin(), entries_.end(),
                             [](const auto& a, const auto& b) { return a.first == b.first; }),
                 entries_.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& [key, value] = entries_[i];
    if (key.find('$') != std::string::npos)
      throw DataError("term table key may not contain '$': " + key);
    by_first_byte_[static_cast<unsigned char>(key[0])].push_back(i);
  }
  // canonical sides must be fixed points or repeated normalization drifts
  for (const auto& [key, value] : entries_) {
    if (apply(value) != value)
      throw DataError("term table value is not a fixed point of the table: " + value);
    if (value != std::string(canonicalize_prose_whitespace(value)))
      throw DataError("term table value is not whitespace-canonical: " + value);
  }
}

std::string TermTable::apply(const std::string& prose) const {
  if (entries_.empty()) return prose;
  std::string out;
  out.reserve(prose.size());
  std::size_t i = 0;
  while (i < prose.size()) {
    const auto& bucket = by_first_byte_[static_cast<unsigned char>(prose[i])];
    bool matched = false;
    for (std::size_t idx : bucket) {
      const auto& [key, value] = entries_[idx];
      if (prose.compare(i, key.size(), key) == 0) {
        out += value;
        i += key.size();
        matched = true;
        break;
      }
    }
    if (!matched) {
      out += prose[i];
      ++i;
    }
  }
  return out;
}

namespace {

std::string process_prose(std::string_view piece, const TermTable& terms,
                          bool keep_boundary_space) {
  return terms.apply(collapse_ws(strip_html(piece), keep_boundary_space));
}

}  // namespace

CanonicalText normalize_exercise(const RawExerciseText& raw, const TermTable& terms,
                                 const NormalizeOptions& opt) {
  const std::string& src = raw.text;
  CanonicalText result;
  std::string out;
  out.reserve(src.size());

  std::size_t pos = 0;
  while (pos <= src.size()) {
    const std::size_t open = src.find('$', pos);
    if (open == std::string::npos) {
      out += process_prose(std::string_view(src).substr(pos), terms, !out.empty());
      break;
    }
    out += process_prose(std::string_view(src).substr(pos, open - pos), terms, !out.empty());
    const std::size_t close = src.find('$', open + 1);
    if (close == std::string::npos) {
      if (!opt.lenient)
        throw NormalizationError("unterminated math segment", open, src.size() - open);
      // keep the tail verbatim, flagged as an unparsed span
      result.fallback_spans.push_back(result.math_spans.size());
      result.math_spans.push_back({out.size(), src.size() - open});
      out += std::string_view(src).substr(open);
      break;
    }
    const std::string_view interior = std::string_view(src).substr(open + 1, close - open - 1);
    std::string canon;
    bool fell_back = false;
    try {
      canon = math::canonicalize_formula(interior);
    } catch (const DataError& e) {
      if (!opt.lenient)
        throw NormalizationError(e.what(), open, close - open + 1);
      canon = std::string(interior);
      fell_back = true;
    }
    out += '$';
    if (fell_back) result.fallback_spans.push_back(result.math_spans.size());
    result.math_spans.push_back({out.size(), canon.size()});
    out += canon;
    out += '$';
    pos = close + 1;
    if (pos == src.size()) break;
  }

  // trim; only a leading trim moves span offsets
  std::size_t lead = 0;
  while (lead < out.size() && is_blank(out[lead])) ++lead;
  std::size_t tail = out.size();
  while (tail > lead && is_blank(out[tail - 1])) --tail;
  result.text = out.substr(lead, tail - lead);
  for (auto& span : result.math_spans) span.offset -= lead;
  return result;
}

}  // namespace fse
