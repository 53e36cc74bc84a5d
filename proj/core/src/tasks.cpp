#include "fse/tasks.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "fse/errors.hpp"
#include "fse/io.hpp"

using json = nlohmann::json;

namespace fse {

const char* task_name(TaskId t) {
  switch (t) {
    case TaskId::T1:
      return "T1";
    case TaskId::T2:
      return "T2";
    default:
      return "T3";
  }
}

TaskId task_from_name(const std::string& name) {
  if (name == "T1") return TaskId::T1;
  if (name == "T2") return TaskId::T2;
  if (name == "T3") return TaskId::T3;
  throw DataError("unknown task id: " + name);
}

TaskPair build_t1(const LabeledPair& pair, const Corpus& corpus) {
  const Exercise& a = corpus.by_id(pair.seed_id);
  const Exercise& b = corpus.by_id(pair.candidate_id);
  return {TaskId::T1, a.stem_and_options(), b.stem_and_options(), pair.label,
          {pair.seed_id, pair.candidate_id, "", false}};
}

TaskPair build_t2(const LabeledPair& pair, const Corpus& corpus) {
  const Exercise& a = corpus.by_id(pair.seed_id);
  const Exercise& b = corpus.by_id(pair.candidate_id);
  if (a.analysis.text.empty()) throw MissingAnalysis(a.id);
  if (b.analysis.text.empty()) throw MissingAnalysis(b.id);
  return {TaskId::T2, a.analysis.text, b.analysis.text, pair.label,
          {pair.seed_id, pair.candidate_id, "", false}};
}

namespace {

// Exercises sharing at least one concept with `a`, excluding `a`/`b` and
// anything without an analysis; sorted by id so sampling is deterministic.
std::vector<const Exercise*> concept_peers(const Exercise& a, const Exercise& b,
                                           const Corpus& corpus) {
  std::set<std::string> wanted(a.concepts.begin(), a.concepts.end());
  std::vector<const Exercise*> peers;
  for (const Exercise& x : corpus) {
    if (x.id == a.id || x.id == b.id) continue;
    if (x.analysis.text.empty()) continue;
    if (std::any_of(x.concepts.begin(), x.concepts.end(),
                    [&](const std::string& c) { return wanted.count(c) > 0; }))
      peers.push_back(&x);
  }
  std::sort(peers.begin(), peers.end(),
            [](const Exercise* l, const Exercise* r) { return l->id < r->id; });
  return peers;
}

std::vector<const Exercise*> any_peers(const Exercise& a, const Exercise& b,
                                       const Corpus& corpus) {
  std::vector<const Exercise*> peers;
  for (const Exercise& x : corpus) {
    if (x.id == a.id || x.id == b.id) continue;
    if (x.analysis.text.empty()) continue;
    peers.push_back(&x);
  }
  std::sort(peers.begin(), peers.end(),
            [](const Exercise* l, const Exercise* r) { return l->id < r->id; });
  return peers;
}

}  // namespace

std::vector<TaskPair> build_t3(const LabeledPair& pair, const Corpus& corpus,
                               Rng& rng, const T3Options& opt) {
  const Exercise& a = corpus.by_id(pair.seed_id);
  const Exercise& b = corpus.by_id(pair.candidate_id);
  std::vector<TaskPair> out;
  TaskOrigin origin{pair.seed_id, pair.candidate_id, "", false};

  if (!a.analysis.text.empty())
    out.push_back({TaskId::T3, a.stem_and_options(), a.analysis.text, 1, origin});
  if (!b.analysis.text.empty())
    out.push_back({TaskId::T3, b.stem_and_options(), b.analysis.text, 1, origin});

  if (pair.label == 0) {
    if (!b.analysis.text.empty())
      out.push_back({TaskId::T3, a.stem_and_options(), b.analysis.text, 0, origin});
    return out;
  }

  // similar pair: sample analyses of concept-sharing exercises as negatives
  auto pool = concept_peers(a, b, corpus);
  bool fallback = false;
  if (pool.empty()) {
    pool = any_peers(a, b, corpus);
    fallback = true;
  }
  const int want = std::min<std::size_t>(opt.negatives_per_pair, pool.size());
  for (int k = 0; k < want; ++k) {
    // without replacement within this pair's emission
    const std::size_t j = k + static_cast<std::size_t>(rng.bounded(pool.size() - k));
    std::swap(pool[k], pool[j]);
    TaskOrigin neg_origin = origin;
    neg_origin.sampled_id = pool[k]->id;
    neg_origin.fallback = fallback;
    out.push_back(
        {TaskId::T3, a.stem_and_options(), pool[k]->analysis.text, 0, neg_origin});
  }
  return out;
}

std::vector<TaskPair> build_all_tasks(const std::vector<LabeledPair>& pairs,
                                      const Corpus& corpus, std::uint64_t master_seed,
                                      const T3Options& opt, TaskBuildStats* stats) {
  TaskBuildStats local;
  TaskBuildStats& st = stats ? *stats : local;
  Rng master(master_seed);
  std::vector<TaskPair> out;
  out.reserve(pairs.size() * 4);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const LabeledPair& p = pairs[i];
    out.push_back(build_t1(p, corpus));
    ++st.t1;
    try {
      out.push_back(build_t2(p, corpus));
      ++st.t2;
    } catch (const MissingAnalysis&) {
      ++st.skipped_missing_analysis;
    }
    Rng pair_rng = master.derive(i);
    auto t3 = build_t3(p, corpus, pair_rng, opt);
    bool has_negative = false;
    for (auto& tp : t3) {
      if (tp.label == 1)
        ++st.t3_positives;
      else {
        ++st.t3_negatives;
        has_negative = true;
        if (tp.origin.fallback) ++st.fallback_negatives;
      }
      out.push_back(std::move(tp));
    }
    if (p.label == 1 && !has_negative) ++st.positives_only;
  }
  return out;
}

void save_tasks_jsonl(const std::filesystem::path& path,
                      const std::vector<TaskPair>& tasks) {
  std::string out;
  for (const TaskPair& t : tasks) {
    json obj;
    obj["task"] = task_name(t.task);
    obj["left"] = t.left;
    obj["right"] = t.right;
    obj["label"] = t.label;
    json origin;
    origin["seed"] = t.origin.seed_id;
    origin["cand"] = t.origin.candidate_id;
    if (!t.origin.sampled_id.empty()) origin["sampled"] = t.origin.sampled_id;
    if (t.origin.fallback) origin["fallback"] = true;
    obj["origin"] = std::move(origin);
    out += obj.dump();
    out += '\n';
  }
  io::atomic_write(path, out);
}

std::vector<TaskPair> load_tasks_jsonl(const std::filesystem::path& path) {
  std::vector<TaskPair> tasks;
  io::for_each_line(path, [&](std::size_t lineno, const std::string& line) {
    if (line.empty()) return;
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object())
      throw SchemaError("not a JSON object", lineno);
    try {
      TaskPair t;
      t.task = task_from_name(obj.at("task").get<std::string>());
      t.left = obj.at("left").get<std::string>();
      t.right = obj.at("right").get<std::string>();
      t.label = obj.at("label").get<int>();
      if (t.label != 0 && t.label != 1)
        throw DataError("label must be 0 or 1");
      const json& origin = obj.at("origin");
      t.origin.seed_id = origin.at("seed").get<std::string>();
      t.origin.candidate_id = origin.at("cand").get<std::string>();
      if (origin.contains("sampled"))
        t.origin.sampled_id = origin["sampled"].get<std::string>();
      if (origin.contains("fallback")) t.origin.fallback = origin["fallback"].get<bool>();
      tasks.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw SchemaError(e.what(), lineno);
    } catch (const DataError& e) {
      throw SchemaError(e.what(), lineno);
    }
  });
  return tasks;
}

std::vector<const TaskPair*> pairs_of_task(const std::vector<TaskPair>& tasks,
                                           TaskId task) {
  std::vector<const TaskPair*> out;
  for (const TaskPair& t : tasks)
    if (t.task == task) out.push_back(&t);
  return out;
}

}  // namespace fse
