#include "fse/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "fse/errors.hpp"
#include "fse/io.hpp"
#include "fse/rng.hpp"

using json = nlohmann::json;

namespace fse {

std::string Exercise::stem_and_options() const {
  std::string out = stem.text;
  for (const auto& o : options) {
    if (o.text.empty()) continue;
    if (!out.empty()) out += ' ';
    out += o.text;
  }
  return out;
}

void Corpus::add(Exercise ex) {
  if (ex.id.empty()) throw DataError("exercise id must be non-empty");
  auto [it, inserted] = index_.emplace(ex.id, items_.size());
  if (!inserted) throw DuplicateId(ex.id);
  items_.push_back(std::move(ex));
}

const Exercise& Corpus::by_id(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownId(id);
  return items_[it->second];
}

namespace {

CanonicalText normalize_field(const std::string& raw, const TermTable& terms,
                              const CorpusLoadOptions& opt) {
  if (!opt.normalize) return CanonicalText{raw, {}, {}};
  return normalize_exercise(RawExerciseText{raw}, terms,
                            NormalizeOptions{.lenient = opt.lenient});
}

std::string require_string(const json& obj, const char* key, std::size_t lineno) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'", lineno);
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string", lineno);
  return it->get<std::string>();
}

std::vector<std::string> require_string_array(const json& obj, const char* key,
                                              std::size_t lineno) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(std::string("missing field '") + key + "'", lineno);
  if (!it->is_array()) throw SchemaError(std::string("field '") + key + "' must be an array", lineno);
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string())
      throw SchemaError(std::string("field '") + key + "' must hold strings", lineno);
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Corpus Corpus::load_jsonl(const std::filesystem::path& path, const TermTable& terms,
                          const CorpusLoadOptions& opt) {
  Corpus corpus;
  io::for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    if (line.empty()) return;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
      throw SchemaError("not a JSON object", lineno);
    Exercise ex;
    ex.id = require_string(obj, "id", lineno);
    if (ex.id.empty()) throw SchemaError("field 'id' must be non-empty", lineno);
    ex.stem = normalize_field(require_string(obj, "stem", lineno), terms, opt);
    for (const auto& o : require_string_array(obj, "options", lineno))
      ex.options.push_back(normalize_field(o, terms, opt));
    ex.analysis = normalize_field(require_string(obj, "analysis", lineno), terms, opt);
    ex.concepts = require_string_array(obj, "concepts", lineno);
    std::sort(ex.concepts.begin(), ex.concepts.end());
    ex.concepts.erase(std::unique(ex.concepts.begin(), ex.concepts.end()),
                      ex.concepts.end());
    corpus.add(std::move(ex));
  });
  return corpus;
}

void Corpus::save_jsonl(const std::filesystem::path& path) const {
  std::string out;
  for (const Exercise& ex : items_) {
    json obj;
    obj["id"] = ex.id;
    obj["stem"] = ex.stem.text;
    json opts = json::array();
    for (const auto& o : ex.options) opts.push_back(o.text);
    obj["options"] = std::move(opts);
    obj["analysis"] = ex.analysis.text;
    obj["concepts"] = ex.concepts;
    out += obj.dump();
    out += '\n';
  }
  io::atomic_write(path, out);
}

std::vector<LabeledPair> load_pairs_tsv(const std::filesystem::path& path) {
  std::vector<LabeledPair> pairs;
  io::for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    if (line.empty()) return;
    auto cols = io::split_tsv(line);
    if (cols.size() != 3 && cols.size() != 4)
      throw SchemaError("pair row needs 3 or 4 tab-separated columns", lineno);
    LabeledPair p;
    p.seed_id = cols[0];
    p.candidate_id = cols[1];
    if (p.seed_id.empty() || p.candidate_id.empty())
      throw SchemaError("empty id", lineno);
    if (p.seed_id == p.candidate_id)
      throw SchemaError("seed and candidate must differ: " + p.seed_id, lineno);
    if (cols[2] == "0") {
      p.label = 0;
    } else if (cols[2] == "1") {
      p.label = 1;
    } else {
      throw SchemaError("label must be 0 or 1, got '" + cols[2] + "'", lineno);
    }
    if (cols.size() == 4) {
      const auto slash = cols[3].find('/');
      if (slash == std::string::npos)
        throw SchemaError("votes column must look like 'similar/total'", lineno);
      AnnotatorVotes v;
      try {
        v.votes_similar = std::stoi(cols[3].substr(0, slash));
        v.votes_total = std::stoi(cols[3].substr(slash + 1));
      } catch (const std::exception&) {
        throw SchemaError("votes column must hold integers", lineno);
      }
      if (v.votes_total != 3)
        throw SchemaError("votes_total must be 3", lineno);
      if (v.votes_similar < 0 || v.votes_similar > v.votes_total)
        throw SchemaError("votes_similar out of range", lineno);
      const int majority = v.votes_similar * 2 > v.votes_total ? 1 : 0;
      if (majority != p.label)
        throw SchemaError("label disagrees with the majority vote", lineno);
      p.votes = v;
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

void save_pairs_tsv(const std::filesystem::path& path,
                    const std::vector<LabeledPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += p.seed_id;
    out += '\t';
    out += p.candidate_id;
    out += '\t';
    out += std::to_string(p.label);
    if (p.votes) {
      out += '\t';
      out += std::to_string(p.votes->votes_similar);
      out += '/';
      out += std::to_string(p.votes->votes_total);
    }
    out += '\n';
  }
  io::atomic_write(path, out);
}

const char* split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Valid:
      return "valid";
    default:
      return "test";
  }
}

Split SplitAssignment::of(const std::string& seed_id) const {
  auto it = by_seed.find(seed_id);
  if (it == by_seed.end()) throw UnknownId(seed_id);
  return it->second;
}

std::vector<std::string> SplitAssignment::ids_in(Split s) const {
  std::vector<std::string> out;
  for (const auto& [id, sp] : by_seed)
    if (sp == s) out.push_back(id);
  return out;
}

std::string SplitAssignment::to_json() const {
  json obj;
  for (Split s : {Split::Train, Split::Valid, Split::Test})
    obj[split_name(s)] = ids_in(s);
  return obj.dump(2) + "\n";
}

SplitAssignment SplitAssignment::from_json(const std::string& text) {
  json obj = json::parse(text, nullptr, false);
  if (obj.is_discarded() || !obj.is_object())
    throw DataError("split file is not a JSON object");
  SplitAssignment a;
  for (Split s : {Split::Train, Split::Valid, Split::Test}) {
    auto it = obj.find(split_name(s));
    if (it == obj.end()) continue;
    for (const auto& id : *it) a.by_seed[id.get<std::string>()] = s;
  }
  return a;
}

SplitAssignment split_by_seed(const std::vector<LabeledPair>& pairs,
                              const std::array<double, 3>& ratios,
                              std::uint64_t rng_seed) {
  if (pairs.empty()) throw EmptyInput("no labeled pairs to split");
  double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0)
    throw UsageError("split ratios must be non-negative and sum to 1");

  std::set<std::string> seed_set;
  for (const auto& p : pairs) seed_set.insert(p.seed_id);
  std::vector<std::string> seeds(seed_set.begin(), seed_set.end());

  Rng rng(rng_seed);
  rng.shuffle(seeds);

  // largest-remainder allocation keeps every bucket within one seed of exact
  const std::size_t n = seeds.size();
  std::array<std::size_t, 3> counts{};
  std::array<std::pair<double, std::size_t>, 3> rema{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    rema[i] = {exact - std::floor(exact), i};
    assigned += counts[i];
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) counts[rema[i % 3].second]++;

  SplitAssignment out;
  std::size_t idx = 0;
  for (std::size_t bucket = 0; bucket < 3; ++bucket) {
    const Split s = bucket == 0 ? Split::Train : bucket == 1 ? Split::Valid : Split::Test;
    for (std::size_t i = 0; i < counts[bucket]; ++i) out.by_seed[seeds[idx++]] = s;
  }
  return out;
}

}  // namespace fse
