#include "fse/model.hpp"

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "fse/errors.hpp"
#include "fse/rng.hpp"
#include "fse/train.hpp"

using namespace fse;

namespace {

Vocab toy_vocab() { return Vocab::from_tokens({"<pad>", "<unk>", "a", "b"}); }

// d=2, one layer, fixed round weights; mirrors the by-hand computation
Model toy_model() {
  Model m(toy_vocab(), ModelConfig{.dim = 2, .layers = 1, .min_freq = 1}, 0);
  auto& emb = m.params().at("embed");
  std::fill(emb.v.begin(), emb.v.end(), 0.0);
  emb.at(2, 0) = 0.3;
  emb.at(2, 1) = -0.2;  // "a"
  emb.at(3, 0) = 0.1;
  emb.at(3, 1) = 0.4;  // "b"
  auto& w = m.params().at("enc.0.W");
  w.at(0, 0) = 0.5;
  w.at(0, 1) = -0.1;
  w.at(1, 0) = 0.2;
  w.at(1, 1) = 0.3;
  auto& b = m.params().at("enc.0.b");
  b.v = {0.05, -0.05};
  for (const char* head : {"head.T1", "head.T2", "head.T3"}) {
    auto& hw = m.params().at(std::string(head) + ".w");
    hw.v = {0.1, 0.2, -0.3, 0.4, 0.05, -0.15};
    m.params().at(std::string(head) + ".b").v = {0.02};
  }
  return m;
}

std::vector<TaskPair> make_tasks(int n, std::uint64_t seed) {
  // small synthetic mix over a tiny token space
  Rng rng(seed);
  const std::vector<std::string> words = {"solve", "find", "area", "root(x,2)",
                                          "frac(1,2)", "angle", "sum", "prove"};
  std::vector<TaskPair> out;
  for (int i = 0; i < n; ++i) {
    auto text = [&] {
      std::string s;
      const auto len = 2 + rng.bounded(4);
      for (std::uint64_t k = 0; k < len; ++k) {
        if (!s.empty()) s += ' ';
        s += words[rng.bounded(words.size())];
      }
      return s;
    };
    TaskId task = i % 3 == 0 ? TaskId::T1 : i % 3 == 1 ? TaskId::T2 : TaskId::T3;
    out.push_back({task, text(), text(), static_cast<int>(rng.bounded(2)),
                   {"s" + std::to_string(i), "c" + std::to_string(i), "", false}});
  }
  return out;
}

double fd_objective(Model& model, const MoeGates* gates,
                    const std::array<double, 3>& alphas,
                    const std::array<std::vector<const TaskPair*>, 3>& batches) {
  return objective(model, gates, alphas, batches, nullptr).combined;
}

// central-difference check over every tensor element
double max_rel_grad_error(Model& model, const MoeGates* gates,
                          const std::array<double, 3>& alphas,
                          const std::array<std::vector<const TaskPair*>, 3>& batches,
                          double h = 1e-4) {
  TensorMap grads = model.params().zeros_like();
  objective(model, gates, alphas, batches, &grads);
  double worst = 0.0;
  for (auto& [name, tensor] : model.params()) {
    Tensor& g = grads.at(name);
    for (std::size_t i = 0; i < tensor.v.size(); ++i) {
      const double keep = tensor.v[i];
      tensor.v[i] = keep + h;
      const double fp = fd_objective(model, gates, alphas, batches);
      tensor.v[i] = keep - h;
      const double fm = fd_objective(model, gates, alphas, batches);
      tensor.v[i] = keep;
      const double fd = (fp - fm) / (2.0 * h);
      const double rel =
          std::abs(g.v[i] - fd) / std::max(1e-6, std::abs(g.v[i]) + std::abs(fd));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("vocab: whitespace split keeps formulas atomic") {
  auto toks = Vocab::split_tokens("If $root(2x+y-5,3x-10)$ holds,then");
  CHECK(toks == std::vector<std::string>{"If", "$root(2x+y-5,3x-10)$", "holds,then"});
}

TEST_CASE("vocab: min frequency cutoff and unk mapping") {
  Vocab v = Vocab::build({"a b a", "b c"}, 2);
  CHECK(v.token_id("a") != Vocab::kUnk);
  CHECK(v.token_id("b") != Vocab::kUnk);
  CHECK(v.token_id("c") == Vocab::kUnk);  // freq 1
  CHECK(v.token_id("zzz") == Vocab::kUnk);
}

TEST_CASE("encode: empty text embeds as a single UNK") {
  Model m = toy_model();
  CHECK(m.encode("") == m.encode_ids(std::vector<int>{Vocab::kUnk}));
}

TEST_CASE("encode: deterministic") {
  Model m = toy_model();
  CHECK(m.encode("a b") == m.encode("a b"));
}

TEST_CASE("encode: trailing PADs do not change the embedding") {
  Model m = toy_model();
  std::vector<int> ids = {2, 3};
  std::vector<int> padded = {2, 3, Vocab::kPad, Vocab::kPad};
  CHECK(m.encode_ids(ids) == m.encode_ids(padded));
}

TEST_CASE("score: zero-weight head gives exactly one half") {
  Model m = toy_model();
  auto& w = m.params().at("head.T1.w");
  std::fill(w.v.begin(), w.v.end(), 0.0);
  m.params().at("head.T1.b").v[0] = 0.0;
  CHECK(m.score_pair(TaskId::T1, "a b", "a b") == 0.5);
  CHECK(m.score_pair(TaskId::T1, "a", "b") == 0.5);
}

TEST_CASE("score: symmetric in the pair order, exactly") {
  Model m(Vocab::build({"p q r s t u v w"}, 1), ModelConfig{.dim = 5, .layers = 2},
          42);
  CHECK(m.score_pair(TaskId::T1, "p q r", "s t") ==
        m.score_pair(TaskId::T1, "s t", "p q r"));
  CHECK(m.score_pair(TaskId::T2, "p w", "v q u") ==
        m.score_pair(TaskId::T2, "v q u", "p w"));
}

TEST_CASE("score: matches the hand-computed toy forward pass") {
  Model m = toy_model();
  const double got = m.score_pair(TaskId::T1, "a b", "b");

  // independent scalar recomputation, straight from the definitions
  auto layer = [](double x0, double x1, double& o0, double& o1) {
    o0 = std::tanh(0.05 + 0.5 * x0 - 0.1 * x1);
    o1 = std::tanh(-0.05 + 0.2 * x0 + 0.3 * x1);
  };
  double ha0, ha1, hb0, hb1;
  layer(0.3, -0.2, ha0, ha1);
  layer(0.1, 0.4, hb0, hb1);
  const double u0 = (ha0 + hb0) / 2, u1 = (ha1 + hb1) / 2;
  const double v0 = hb0, v1 = hb1;
  const double logit = 0.02 + 0.1 * (u0 + v0) + 0.2 * (u1 + v1) -
                       0.3 * std::abs(u0 - v0) + 0.4 * std::abs(u1 - v1) +
                       0.05 * (u0 * v0) - 0.15 * (u1 * v1);
  const double expected = 1.0 / (1.0 + std::exp(-logit));
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  CHECK(got == doctest::Approx(0.51658081907387055).epsilon(1e-9));
}

TEST_CASE("task_loss: saturated predictions give zero loss") {
  Model m = toy_model();
  // huge bias drives p -> 1 for every pair; label-1 pairs then cost ~0
  m.params().at("head.T1.b").v[0] = 60.0;
  TaskPair p{TaskId::T1, "a", "b", 1, {}};
  TaskBatch batch{TaskId::T1, {&p}};
  CHECK(m.task_loss(batch).loss == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("task_loss: p=0.5 with label 1 costs ln 2") {
  Model m = toy_model();
  auto& w = m.params().at("head.T1.w");
  std::fill(w.v.begin(), w.v.end(), 0.0);
  m.params().at("head.T1.b").v[0] = 0.0;
  TaskPair p{TaskId::T1, "a", "b", 1, {}};
  TaskBatch batch{TaskId::T1, {&p}};
  CHECK(m.task_loss(batch).loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("task_loss: three-pair batch matches the brute-force BCE oracle") {
  Model m = toy_model();
  TaskPair p1{TaskId::T1, "a b", "b", 1, {}};
  TaskPair p2{TaskId::T1, "a", "a b", 0, {}};
  TaskPair p3{TaskId::T1, "b", "a", 1, {}};
  TaskBatch batch{TaskId::T1, {&p1, &p2, &p3}};
  const auto r = m.task_loss(batch);

  double oracle = 0.0;
  for (const TaskPair* p : batch.pairs) {
    const double prob = m.score_pair(TaskId::T1, p->left, p->right);
    oracle += p->label == 1 ? -std::log(prob) : -std::log(1.0 - prob);
  }
  oracle /= 3.0;
  CHECK(r.loss == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(r.feature.size() == m.feature_dim());
}

TEST_CASE("task_loss: empty batch throws") {
  Model m = toy_model();
  TaskBatch batch{TaskId::T1, {}};
  CHECK_THROWS_AS(m.task_loss(batch), EmptyBatch);
}

TEST_CASE("gradients: zero task weight leaves that head untouched") {
  auto tasks = make_tasks(12, 5);
  Model m(Vocab::build({"solve find area root(x,2) frac(1,2) angle sum prove"}, 1),
          ModelConfig{.dim = 3, .layers = 1}, 7);
  std::array<std::vector<const TaskPair*>, 3> batches{
      pairs_of_task(tasks, TaskId::T1), pairs_of_task(tasks, TaskId::T2),
      pairs_of_task(tasks, TaskId::T3)};
  TensorMap grads = m.params().zeros_like();
  objective(m, nullptr, {0.5, 0.5, 0.0}, batches, &grads);
  for (double g : grads.at("head.T3.w").v) CHECK(g == 0.0);
  CHECK(grads.at("head.T3.b").v[0] == 0.0);
  bool t1_nonzero = false;
  for (double g : grads.at("head.T1.w").v) t1_nonzero |= g != 0.0;
  CHECK(t1_nonzero);
}

TEST_CASE("gradients: analytic matches central differences, static weights") {
  auto tasks = make_tasks(12, 11);
  Model m(Vocab::build({"solve find area root(x,2) frac(1,2) angle sum prove"}, 1),
          ModelConfig{.dim = 4, .layers = 2}, 23);
  std::array<std::vector<const TaskPair*>, 3> batches{
      pairs_of_task(tasks, TaskId::T1), pairs_of_task(tasks, TaskId::T2),
      pairs_of_task(tasks, TaskId::T3)};
  CHECK(max_rel_grad_error(m, nullptr, {0.5, 0.3, 0.2}, batches) < 1e-4);
}

TEST_CASE("gradients: duplicated batch changes nothing (mean loss)") {
  auto tasks = make_tasks(9, 3);
  Model m(Vocab::build({"solve find area root(x,2) frac(1,2) angle sum prove"}, 1),
          ModelConfig{.dim = 3, .layers = 1}, 77);
  std::array<std::vector<const TaskPair*>, 3> single{
      pairs_of_task(tasks, TaskId::T1), pairs_of_task(tasks, TaskId::T2),
      pairs_of_task(tasks, TaskId::T3)};
  std::array<std::vector<const TaskPair*>, 3> doubled = single;
  for (std::size_t t = 0; t < 3; ++t)
    doubled[t].insert(doubled[t].end(), single[t].begin(), single[t].end());

  TensorMap g1 = m.params().zeros_like();
  TensorMap g2 = m.params().zeros_like();
  objective(m, nullptr, {0.4, 0.4, 0.2}, single, &g1);
  objective(m, nullptr, {0.4, 0.4, 0.2}, doubled, &g2);
  for (auto it1 = g1.begin(), it2 = g2.begin(); it1 != g1.end(); ++it1, ++it2)
    for (std::size_t i = 0; i < it1->second.v.size(); ++i)
      CHECK(it1->second.v[i] == doctest::Approx(it2->second.v[i]).epsilon(1e-12));
}

TEST_CASE("training: deterministic under a fixed seed") {
  auto tasks = make_tasks(24, 9);
  TrainConfig cfg;
  cfg.model = ModelConfig{.dim = 4, .layers = 1, .min_freq = 1};
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 123;
  auto a = train_model(tasks, cfg);
  auto b = train_model(tasks, cfg);
  CHECK(a.model.params() == b.model.params());
  REQUIRE(a.history.size() == b.history.size());
  CHECK(a.history.back().combined == b.history.back().combined);
}

TEST_CASE("checkpoint: save and reload bit-exactly") {
  auto tasks = make_tasks(15, 2);
  TrainConfig cfg;
  cfg.model = ModelConfig{.dim = 4, .layers = 1, .min_freq = 1};
  cfg.epochs = 1;
  cfg.batch_size = 4;
  auto trained = train_model(tasks, cfg);
  auto dir = std::filesystem::temp_directory_path() / "fse_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint(dir, trained.model, trained.moe);
  auto loaded = load_checkpoint(dir);
  CHECK(loaded.model.params() == trained.model.params());
  CHECK(loaded.model.vocab().tokens() == trained.model.vocab().tokens());
  CHECK(loaded.moe.enabled == trained.moe.enabled);
  // and the reloaded model scores identically
  CHECK(loaded.model.score_pair(TaskId::T1, "solve find", "area sum") ==
        trained.model.score_pair(TaskId::T1, "solve find", "area sum"));
}

TEST_SUITE_END();
