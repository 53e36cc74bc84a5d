#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fse/corpus.hpp"
#include "fse/rng.hpp"

namespace fse {

enum class TaskId { T1, T2, T3 };

const char* task_name(TaskId t);
TaskId task_from_name(const std::string& name);

// Provenance back to the labeled pair that produced a task pair; sampled_id
// is set for T3 negatives drawn from the corpus, fallback marks a negative
// drawn without a concept-sharing peer.
struct TaskOrigin {
  std::string seed_id;
  std::string candidate_id;
  std::string sampled_id;
  bool fallback = false;

  bool operator==(const TaskOrigin&) const = default;
};

struct TaskPair {
  TaskId task = TaskId::T1;
  std::string left;
  std::string right;
  int label = 0;
  TaskOrigin origin;

  bool operator==(const TaskPair&) const = default;
};

// One batch holds pairs of a single task.
struct TaskBatch {
  TaskId task = TaskId::T1;
  std::vector<const TaskPair*> pairs;
};

// T1: stem+options of both exercises, the label carried over.
TaskPair build_t1(const LabeledPair& pair, const Corpus& corpus);

// T2: analysis vs analysis; throws MissingAnalysis when either is empty.
TaskPair build_t2(const LabeledPair& pair, const Corpus& corpus);

struct T3Options {
  int negatives_per_pair = 1;  // per similar pair
};

// T3: positives pair each exercise's stem with its own analysis. A
// dissimilar label yields the direct negative (stem A, analysis B); a
// similar label samples a concept-sharing exercise's analysis as the
// negative, falling back to a uniform draw (flagged) when no peer exists.
std::vector<TaskPair> build_t3(const LabeledPair& pair, const Corpus& corpus,
                               Rng& rng, const T3Options& opt = {});

struct TaskBuildStats {
  std::size_t t1 = 0;
  std::size_t t2 = 0;
  std::size_t t3_positives = 0;
  std::size_t t3_negatives = 0;
  std::size_t skipped_missing_analysis = 0;  // pairs without a T2
  std::size_t fallback_negatives = 0;
  std::size_t positives_only = 0;  // similar pairs with no negative source
};

// Builds all three task sets from labeled pairs. Deterministic: each pair
// gets its own rng stream derived from the master seed and its position.
std::vector<TaskPair> build_all_tasks(const std::vector<LabeledPair>& pairs,
                                      const Corpus& corpus, std::uint64_t master_seed,
                                      const T3Options& opt = {},
                                      TaskBuildStats* stats = nullptr);

void save_tasks_jsonl(const std::filesystem::path& path,
                      const std::vector<TaskPair>& tasks);
std::vector<TaskPair> load_tasks_jsonl(const std::filesystem::path& path);

// Pairs of a single task, in input order.
std::vector<const TaskPair*> pairs_of_task(const std::vector<TaskPair>& tasks,
                                           TaskId task);

}  // namespace fse
