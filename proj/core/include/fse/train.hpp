#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "fse/model.hpp"
#include "fse/moe.hpp"
#include "fse/tasks.hpp"

namespace fse {

struct TrainConfig {
  ModelConfig model;
  MoeConfig moe;
  std::size_t epochs = 3;
  std::size_t batch_size = 32;
  double lr = 1e-3;  // from-scratch desk model; far above a fine-tuning rate
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 17;
};

struct StepInfo {
  std::array<double, 3> losses{};  // L_T1, L_T2, L_T3 (0 for absent tasks)
  std::array<double, 3> alpha{};
  double combined = 0.0;
};

// One evaluation of the Eq.-1 objective on fixed per-task batches; when
// `grads` is non-null the exact gradient of the combined loss with respect
// to every tensor (encoder, heads, gates) is accumulated into it, including
// the path through alpha into the batch-mean task features. An empty batch
// contributes loss 0 and a zero feature vector.
StepInfo objective(const Model& model, const MoeGates* gates,
                   const std::array<double, 3>& static_alphas,
                   const std::array<std::vector<const TaskPair*>, 3>& batches,
                   TensorMap* grads);

class Adam {
 public:
  Adam(const TensorMap& params, double lr, double beta1, double beta2, double eps);
  void step(TensorMap& params, const TensorMap& grads);

 private:
  TensorMap m_, v_;
  double lr_, b1_, b2_, eps_;
  std::size_t t_ = 0;
};

struct TrainedModel {
  Model model;  // gate tensors live in model.params() when MoE is enabled
  MoeConfig moe;
  std::vector<StepInfo> history;

  std::optional<MoeGates> gates() const;
};

// Builds the vocab from the task texts, initializes encoder/heads (+gates),
// and runs seeded mini-batch training of the Eq.-1 objective. T1 drives the
// step count per epoch; T2/T3 batches cycle through their own shuffles.
// Throws NumericError if the loss stops being finite.
TrainedModel train_model(const std::vector<TaskPair>& tasks, const TrainConfig& cfg,
                         std::ostream* alpha_csv = nullptr);

// Checkpoint: one JSON file with config, vocab and all tensors, reloaded
// bit-exactly. `path` may be the file or a directory (then model.json in it).
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const MoeConfig& moe);
struct Checkpoint {
  Model model;
  MoeConfig moe;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fse
