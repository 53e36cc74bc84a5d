#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fse/normalizer.hpp"

namespace fse {

struct Exercise {
  std::string id;
  CanonicalText stem;
  std::vector<CanonicalText> options;
  CanonicalText analysis;
  std::vector<std::string> concepts;  // sorted, unique

  // stem followed by the options, the text pair fed to the FSE task
  std::string stem_and_options() const;

  bool operator==(const Exercise&) const = default;
};

struct AnnotatorVotes {
  int votes_similar = 0;
  int votes_total = 0;
  bool operator==(const AnnotatorVotes&) const = default;
};

struct LabeledPair {
  std::string seed_id;
  std::string candidate_id;
  int label = 0;  // 1 similar, 0 dissimilar
  std::optional<AnnotatorVotes> votes;

  bool operator==(const LabeledPair&) const = default;
};

struct CorpusLoadOptions {
  bool normalize = true;  // pass every text field through normalize_exercise
  bool lenient = false;
};

class Corpus {
 public:
  void add(Exercise ex);  // throws DuplicateId

  bool contains(const std::string& id) const { return index_.count(id) > 0; }
  const Exercise& by_id(const std::string& id) const;  // throws UnknownId
  const Exercise& at(std::size_t i) const { return items_[i]; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  static Corpus load_jsonl(const std::filesystem::path& path, const TermTable& terms,
                           const CorpusLoadOptions& opt = {});
  void save_jsonl(const std::filesystem::path& path) const;

  bool operator==(const Corpus& other) const { return items_ == other.items_; }

 private:
  std::vector<Exercise> items_;
  std::unordered_map<std::string, std::size_t> index_;
};

// pairs TSV: seed_id<TAB>candidate_id<TAB>label, optional 4th column
// "votes_similar/votes_total" validated against the label.
std::vector<LabeledPair> load_pairs_tsv(const std::filesystem::path& path);
void save_pairs_tsv(const std::filesystem::path& path,
                    const std::vector<LabeledPair>& pairs);

enum class Split { Train, Valid, Test };

const char* split_name(Split s);

struct SplitAssignment {
  std::map<std::string, Split> by_seed;

  Split of(const std::string& seed_id) const;  // throws UnknownId
  std::vector<std::string> ids_in(Split s) const;
  std::string to_json() const;
  static SplitAssignment from_json(const std::string& text);
};

// Deterministic seed-level split; every pair follows its seed exercise, so no
// seed leaks across splits. Counts follow the ratios by largest remainder
// (each within one seed of exact).
SplitAssignment split_by_seed(const std::vector<LabeledPair>& pairs,
                              const std::array<double, 3>& ratios,
                              std::uint64_t rng_seed);

}  // namespace fse
