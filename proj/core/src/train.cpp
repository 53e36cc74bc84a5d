#include "fse/train.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "fse/errors.hpp"
#include "fse/io.hpp"
#include "fse/rng.hpp"

using json = nlohmann::json;

namespace fse {

StepInfo objective(const Model& model, const MoeGates* gates,
                   const std::array<double, 3>& static_alphas,
                   const std::array<std::vector<const TaskPair*>, 3>& batches,
                   TensorMap* grads) {
  constexpr std::array<TaskId, 3> kTasks{TaskId::T1, TaskId::T2, TaskId::T3};
  StepInfo info;

  std::array<std::vector<Model::PairCache>, 3> caches;
  std::array<std::vector<double>, 3> features;
  for (std::size_t t = 0; t < 3; ++t) {
    features[t].assign(model.feature_dim(), 0.0);
    const auto& batch = batches[t];
    if (batch.empty()) continue;
    // static zero weight: the term contributes nothing and has no gate path
    if (!gates && static_alphas[t] == 0.0) continue;
    caches[t].reserve(batch.size());
    double loss = 0.0;
    for (const TaskPair* p : batch) {
      Model::PairCache pc = model.forward_pair(kTasks[t], *p);
      loss += softplus(pc.logit) - static_cast<double>(p->label) * pc.logit;
      for (std::size_t i = 0; i < pc.z.size(); ++i) features[t][i] += pc.z[i];
      caches[t].push_back(std::move(pc));
    }
    const double n = static_cast<double>(batch.size());
    info.losses[t] = loss / n;
    for (double& x : features[t]) x /= n;
  }

  MoeGates::Cache gate_cache;
  TaskWeights weights = gates ? gates->forward(model.params(), features, &gate_cache)
                              : static_weights(static_alphas);
  info.alpha = weights.alphas();
  info.combined = combined_loss(info.losses, weights);

  if (!grads) return info;

  std::array<std::vector<double>, 3> d_features{};
  if (gates) {
    // dL/dalpha_i is the task loss itself
    gates->backward(model.params(), gate_cache, info.losses, *grads, d_features);
  }
  for (std::size_t t = 0; t < 3; ++t) {
    if (caches[t].empty()) continue;
    const double n = static_cast<double>(caches[t].size());
    std::vector<double> dz_extra;
    if (gates) {
      dz_extra = d_features[t];
      for (double& x : dz_extra) x /= n;
    }
    for (std::size_t j = 0; j < caches[t].size(); ++j) {
      const Model::PairCache& pc = caches[t][j];
      const double y = static_cast<double>(batches[t][j]->label);
      const double d_logit = info.alpha[t] * (pc.prob - y) / n;
      model.backward_pair(kTasks[t], pc, d_logit, dz_extra, *grads);
    }
  }
  return info;
}

Adam::Adam(const TensorMap& params, double lr, double beta1, double beta2, double eps)
    : m_(params.zeros_like()), v_(params.zeros_like()), lr_(lr), b1_(beta1),
      b2_(beta2), eps_(eps) {}

void Adam::step(TensorMap& params, const TensorMap& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  auto pit = params.begin();
  auto git = grads.begin();
  auto mit = m_.begin();
  auto vit = v_.begin();
  for (; pit != params.end(); ++pit, ++git, ++mit, ++vit) {
    auto& p = pit->second.v;
    const auto& g = git->second.v;
    auto& m = mit->second.v;
    auto& v = vit->second.v;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1_ * m[i] + (1.0 - b1_) * g[i];
      v[i] = b2_ * v[i] + (1.0 - b2_) * g[i] * g[i];
      p[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps_);
    }
  }
}

std::optional<MoeGates> TrainedModel::gates() const {
  if (!moe.enabled) return std::nullopt;
  return MoeGates(moe, model.feature_dim());
}

TrainedModel train_model(const std::vector<TaskPair>& tasks, const TrainConfig& cfg,
                         std::ostream* alpha_csv) {
  if (tasks.empty()) throw EmptyInput("no task pairs to train on");

  std::vector<std::string> texts;
  texts.reserve(tasks.size() * 2);
  for (const auto& t : tasks) {
    texts.push_back(t.left);
    texts.push_back(t.right);
  }
  Vocab vocab = Vocab::build(texts, cfg.model.min_freq);

  Rng master(cfg.seed);
  Model model(std::move(vocab), cfg.model, master.derive("init").next_u64());
  std::optional<MoeGates> gates;
  if (cfg.moe.enabled) {
    gates.emplace(cfg.moe, model.feature_dim());
    gates->register_params(model.params(), master.derive("gates").next_u64());
  }

  std::array<std::vector<const TaskPair*>, 3> all{
      pairs_of_task(tasks, TaskId::T1), pairs_of_task(tasks, TaskId::T2),
      pairs_of_task(tasks, TaskId::T3)};
  if (all[0].empty()) throw EmptyInput("training needs at least one T1 pair");

  Adam adam(model.params(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
  TensorMap grads = model.params().zeros_like();

  TrainedModel out{std::move(model), cfg.moe, {}};
  if (alpha_csv) *alpha_csv << "step,alpha1,alpha2,alpha3,combined_loss\n";

  const std::size_t bs = std::max<std::size_t>(1, cfg.batch_size);
  const std::size_t steps_per_epoch = (all[0].size() + bs - 1) / bs;
  std::array<std::size_t, 3> cursor{};
  std::size_t global_step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng erng = master.derive(1000 + epoch);
    for (auto& task_pairs : all) erng.shuffle(task_pairs);
    cursor = {0, 0, 0};

    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++global_step) {
      std::array<std::vector<const TaskPair*>, 3> batch;
      for (std::size_t t = 0; t < 3; ++t) {
        const auto& src = all[t];
        if (src.empty()) continue;
        const std::size_t take = std::min(bs, src.size());
        for (std::size_t k = 0; k < take; ++k) {
          batch[t].push_back(src[cursor[t]]);
          cursor[t] = (cursor[t] + 1) % src.size();
        }
      }
      grads.zero_all();
      StepInfo info =
          objective(out.model, gates ? &*gates : nullptr, cfg.moe.static_alphas,
                    batch, &grads);
      if (!std::isfinite(info.combined))
        throw NumericError("training loss is not finite at step " +
                           std::to_string(global_step));
      adam.step(out.model.params(), grads);
      if (alpha_csv)
        *alpha_csv << global_step << ',' << io::format_double(info.alpha[0]) << ','
                   << io::format_double(info.alpha[1]) << ','
                   << io::format_double(info.alpha[2]) << ','
                   << io::format_double(info.combined) << "\n";
      out.history.push_back(info);
    }
  }
  if (!out.model.params().all_finite())
    throw NumericError("non-finite parameters after training");
  return out;
}

namespace {

std::filesystem::path checkpoint_file(const std::filesystem::path& path) {
  if (path.extension() == ".json") return path;
  return path / "model.json";
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const MoeConfig& moe) {
  json obj;
  obj["version"] = 1;
  obj["model"] = {{"dim", model.config().dim},
                  {"layers", model.config().layers},
                  {"min_freq", model.config().min_freq}};
  obj["moe"] = {{"enabled", moe.enabled},
                {"shared_gate", moe.shared_gate},
                {"hidden", moe.hidden},
                {"static_alphas", moe.static_alphas}};
  obj["vocab"] = model.vocab().tokens();
  json tensors = json::object();
  for (const auto& [name, t] : model.params())
    tensors[name] = {{"shape", t.shape}, {"data", t.v}};
  obj["tensors"] = std::move(tensors);
  io::atomic_write(checkpoint_file(path), obj.dump());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto file = checkpoint_file(path);
  json obj = json::parse(io::read_file(file), nullptr, false);
  if (obj.is_discarded()) throw DataError("checkpoint is not valid JSON: " + file.string());
  try {
    if (obj.at("version").get<int>() != 1)
      throw DataError("unsupported checkpoint version");
    ModelConfig mc;
    mc.dim = obj.at("model").at("dim").get<std::size_t>();
    mc.layers = obj.at("model").at("layers").get<std::size_t>();
    mc.min_freq = obj.at("model").at("min_freq").get<std::size_t>();
    MoeConfig moe;
    moe.enabled = obj.at("moe").at("enabled").get<bool>();
    moe.shared_gate = obj.at("moe").at("shared_gate").get<bool>();
    moe.hidden = obj.at("moe").at("hidden").get<std::vector<std::size_t>>();
    moe.static_alphas = obj.at("moe").at("static_alphas").get<std::array<double, 3>>();
    Vocab vocab = Vocab::from_tokens(obj.at("vocab").get<std::vector<std::string>>());
    TensorMap params;
    for (const auto& [name, tj] : obj.at("tensors").items()) {
      Tensor& t = params.add(name, tj.at("shape").get<std::vector<std::size_t>>());
      auto data = tj.at("data").get<std::vector<double>>();
      if (data.size() != t.numel())
        throw DataError("tensor data does not match shape: " + name);
      t.v = std::move(data);
    }
    Model model(std::move(vocab), mc, std::move(params));
    if (moe.enabled)
      MoeGates(moe, model.feature_dim()).validate_params(model.params());
    return Checkpoint{std::move(model), std::move(moe)};
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace fse
