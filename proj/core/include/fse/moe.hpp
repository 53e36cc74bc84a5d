#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fse/nn.hpp"

namespace fse {

// Convex task coefficients: alpha_i >= 0 and sum alpha = 1 (tolerance 1e-6).
// Gate-produced weights are strictly positive by construction (softmax);
// static weights may sit on the simplex boundary (e.g. a T1-only run).
class TaskWeights {
 public:
  static TaskWeights from_alphas(const std::array<double, 3>& a);  // validates

  double operator[](std::size_t i) const { return alpha_[i]; }
  const std::array<double, 3>& alphas() const { return alpha_; }

 private:
  explicit TaskWeights(const std::array<double, 3>& a) : alpha_(a) {}
  std::array<double, 3> alpha_{};
};

// Fixed coefficients, the manual-tuning baseline. Throws InvalidSimplexPoint.
TaskWeights static_weights(const std::array<double, 3>& alphas);

// Eq.-1 combination: alpha1*L_T1 + alpha2*L_T2 + alpha3*L_T3.
double combined_loss(const std::array<double, 3>& losses, const TaskWeights& weights);

struct MoeConfig {
  bool enabled = true;
  bool shared_gate = false;  // one 3-output network over concat(Fe_T1..T3)
  std::vector<std::size_t> hidden;  // two hidden sizes; empty -> {d_f, d_f/2}
  std::array<double, 3> static_alphas = {1.0 / 3, 1.0 / 3, 1.0 / 3};
};

// Three-layer gate networks producing the task coefficients. Default reading:
// one gate per task, scalar logit each, softmax across the three (the
// shared_gate flag switches to a single network with three outputs). The
// gates are stateless over a TensorMap so parameters, gradients and optimizer
// state stay in one place with the encoder's.
class MoeGates {
 public:
  MoeGates(const MoeConfig& cfg, std::size_t feature_dim);

  // adds freshly initialized gate tensors (prefix "gate.")
  void register_params(TensorMap& params, std::uint64_t seed) const;
  // checkpoint path: verify tensors are present with the right shapes
  void validate_params(const TensorMap& params) const;

  struct Cache {
    std::array<std::vector<double>, 3> input;
    std::vector<double> shared_input;
    std::array<std::vector<double>, 3> h1, h2;  // shared mode uses slot 0
    std::array<double, 3> logits{};
    std::array<double, 3> alpha{};
  };

  // logits_i = Gate_i(Fe_i); alpha = softmax(logits). DimensionMismatch when
  // a feature vector does not match feature_dim.
  TaskWeights forward(const TensorMap& params,
                      const std::array<std::vector<double>, 3>& features,
                      Cache* cache = nullptr) const;

  // d_alpha is dLoss/dalpha; accumulates gate gradients and returns
  // dLoss/dFe_i for the encoder path.
  void backward(const TensorMap& params, const Cache& cache,
                const std::array<double, 3>& d_alpha, TensorMap& grads,
                std::array<std::vector<double>, 3>& d_features) const;

  std::size_t feature_dim() const { return d_f_; }
  const std::array<std::size_t, 2>& hidden_sizes() const { return hidden_; }
  const MoeConfig& config() const { return cfg_; }

 private:
  MoeConfig cfg_;
  std::size_t d_f_;
  std::array<std::size_t, 2> hidden_{};
};

// Numerically stable softmax over three logits.
std::array<double, 3> softmax3(const std::array<double, 3>& logits);

}  // namespace fse
