#include "fse/tasks.hpp"

#include <doctest.h>

#include <set>

#include "fse/errors.hpp"

using namespace fse;

namespace {

CanonicalText ct(std::string s) { return CanonicalText{std::move(s), {}, {}}; }

Exercise make_ex(std::string id, std::string stem, std::string analysis,
                 std::vector<std::string> concepts,
                 std::vector<std::string> options = {}) {
  Exercise e;
  e.id = std::move(id);
  e.stem = ct(std::move(stem));
  for (auto& o : options) e.options.push_back(ct(std::move(o)));
  e.analysis = ct(std::move(analysis));
  e.concepts = std::move(concepts);
  return e;
}

Corpus small_corpus() {
  Corpus c;
  c.add(make_ex("A", "stem A", "analysis A", {"c1"}, {"optA"}));
  c.add(make_ex("B", "stem B", "analysis B", {"c1", "c2"}));
  c.add(make_ex("X", "stem X", "analysis X", {"c1"}));
  c.add(make_ex("Y", "stem Y", "analysis Y", {"c9"}));
  c.add(make_ex("Z", "stem Z", "", {"c1"}));  // no analysis
  return c;
}

}  // namespace

TEST_SUITE_BEGIN("tasks");

TEST_CASE("t1: stems and options on both sides, label carried") {
  auto c = small_corpus();
  auto t = build_t1({"A", "B", 1, {}}, c);
  CHECK(t.task == TaskId::T1);
  CHECK(t.left == "stem A optA");
  CHECK(t.right == "stem B");
  CHECK(t.label == 1);
  CHECK(build_t1({"A", "B", 0, {}}, c).label == 0);
}

TEST_CASE("t1: missing id throws") {
  auto c = small_corpus();
  CHECK_THROWS_AS(build_t1({"A", "missing", 1, {}}, c), UnknownId);
}

TEST_CASE("t2: analyses on both sides") {
  auto c = small_corpus();
  auto t = build_t2({"A", "B", 1, {}}, c);
  CHECK(t.task == TaskId::T2);
  CHECK(t.left == "analysis A");
  CHECK(t.right == "analysis B");
  CHECK(build_t2({"A", "B", 0, {}}, c).label == 0);
}

TEST_CASE("t2: empty analysis throws MissingAnalysis") {
  auto c = small_corpus();
  CHECK_THROWS_AS(build_t2({"A", "Z", 1, {}}, c), MissingAnalysis);
}

TEST_CASE("t3: dissimilar pair gives the direct negative") {
  auto c = small_corpus();
  Rng rng(1);
  auto ts = build_t3({"A", "B", 0, {}}, c, rng);
  REQUIRE(ts.size() == 3);
  CHECK(ts[0].label == 1);
  CHECK(ts[0].left == "stem A optA");
  CHECK(ts[0].right == "analysis A");
  CHECK(ts[1].label == 1);
  CHECK(ts[1].right == "analysis B");
  CHECK(ts[2].label == 0);
  CHECK(ts[2].left == "stem A optA");
  CHECK(ts[2].right == "analysis B");
}

TEST_CASE("t3: similar pair samples a concept-sharing negative") {
  auto c = small_corpus();
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    Rng rng(seed);
    auto ts = build_t3({"A", "B", 1, {}}, c, rng);
    REQUIRE(ts.size() == 3);
    const TaskPair& neg = ts.back();
    CHECK(neg.label == 0);
    // X is the only exercise sharing c1 with A that is not A/B and has an
    // analysis (Z has none, Y shares nothing)
    CHECK(neg.origin.sampled_id == "X");
    CHECK(neg.right == "analysis X");
    CHECK_FALSE(neg.origin.fallback);
  }
}

TEST_CASE("t3: no concept peer falls back to a uniform draw, flagged") {
  Corpus c;
  c.add(make_ex("A", "stem A", "analysis A", {"c1"}));
  c.add(make_ex("B", "stem B", "analysis B", {"c1"}));
  c.add(make_ex("Q", "stem Q", "analysis Q", {"other"}));
  Rng rng(3);
  auto ts = build_t3({"A", "B", 1, {}}, c, rng);
  REQUIRE(ts.size() == 3);
  CHECK(ts.back().origin.sampled_id == "Q");
  CHECK(ts.back().origin.fallback);
}

TEST_CASE("t3: two-exercise corpus emits positives only") {
  Corpus c;
  c.add(make_ex("A", "stem A", "analysis A", {"c1"}));
  c.add(make_ex("B", "stem B", "analysis B", {"c1"}));
  Rng rng(3);
  // the sampler's support is empty by enumeration: every other id is A or B
  auto ts = build_t3({"A", "B", 1, {}}, c, rng);
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].label == 1);
  CHECK(ts[1].label == 1);

  TaskBuildStats stats;
  auto all = build_all_tasks({{"A", "B", 1, {}}}, c, 17, {}, &stats);
  CHECK(stats.positives_only == 1);
  CHECK(stats.t3_negatives == 0);
}

TEST_CASE("t3: sampled negatives never reuse A or B and share a concept") {
  auto c = small_corpus();
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    Rng rng(seed);
    for (const auto& t : build_t3({"A", "B", 1, {}}, c, rng, {.negatives_per_pair = 2})) {
      if (t.label != 0) continue;
      CHECK(t.origin.sampled_id != "A");
      CHECK(t.origin.sampled_id != "B");
      if (!t.origin.fallback) {
        const auto& sampled = c.by_id(t.origin.sampled_id);
        bool shares = false;
        for (const auto& cc : sampled.concepts)
          shares |= cc == "c1";
        CHECK(shares);
      }
    }
  }
}

TEST_CASE("build_all_tasks: counts and determinism") {
  auto c = small_corpus();
  std::vector<LabeledPair> pairs = {
      {"A", "B", 1, {}}, {"A", "X", 0, {}}, {"B", "Z", 1, {}}};
  TaskBuildStats stats;
  auto tasks = build_all_tasks(pairs, c, 17, {}, &stats);

  CHECK(stats.t1 == 3);
  CHECK(stats.t2 == 2);  // B-Z lacks an analysis
  CHECK(stats.skipped_missing_analysis == 1);
  CHECK(pairs_of_task(tasks, TaskId::T1).size() == 3);
  CHECK(pairs_of_task(tasks, TaskId::T2).size() <= 3);
  CHECK(pairs_of_task(tasks, TaskId::T3).size() >= 3);

  auto tasks2 = build_all_tasks(pairs, c, 17, {}, nullptr);
  CHECK(tasks == tasks2);
  auto tasks3 = build_all_tasks(pairs, c, 18, {}, nullptr);
  CHECK(tasks3.size() == tasks.size());
}

TEST_CASE("tasks jsonl round-trip") {
  auto c = small_corpus();
  std::vector<LabeledPair> pairs = {{"A", "B", 1, {}}, {"A", "X", 0, {}}};
  auto tasks = build_all_tasks(pairs, c, 17);
  auto path = std::filesystem::temp_directory_path() / "fse_tasks_rt.jsonl";
  save_tasks_jsonl(path, tasks);
  CHECK(load_tasks_jsonl(path) == tasks);
}

TEST_SUITE_END();
