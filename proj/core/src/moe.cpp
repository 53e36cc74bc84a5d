#include "fse/moe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fse/errors.hpp"
#include "fse/rng.hpp"

namespace fse {

TaskWeights TaskWeights::from_alphas(const std::array<double, 3>& a) {
  double sum = 0.0;
  for (double x : a) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw InvalidSimplexPoint("coefficients must be finite and non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw InvalidSimplexPoint("coefficients must sum to 1, got " + std::to_string(sum));
  return TaskWeights(a);
}

TaskWeights static_weights(const std::array<double, 3>& alphas) {
  return TaskWeights::from_alphas(alphas);
}

double combined_loss(const std::array<double, 3>& losses, const TaskWeights& weights) {
  return weights[0] * losses[0] + weights[1] * losses[1] + weights[2] * losses[2];
}

std::array<double, 3> softmax3(const std::array<double, 3>& logits) {
  const double m = std::max({logits[0], logits[1], logits[2]});
  std::array<double, 3> e{};
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    e[i] = std::exp(logits[i] - m);
    sum += e[i];
  }
  for (double& x : e) x /= sum;
  return e;
}

namespace {

std::string gate_tensor(std::size_t gate, const char* part) {
  return "gate." + std::to_string(gate) + "." + part;
}

constexpr const char* kShared = "gate.shared.";

}  // namespace

MoeGates::MoeGates(const MoeConfig& cfg, std::size_t feature_dim)
    : cfg_(cfg), d_f_(feature_dim) {
  if (feature_dim == 0) throw UsageError("gate feature dimension must be positive");
  if (cfg_.hidden.empty()) {
    hidden_ = {d_f_, std::max<std::size_t>(1, d_f_ / 2)};
  } else if (cfg_.hidden.size() == 2) {
    hidden_ = {cfg_.hidden[0], cfg_.hidden[1]};
    if (hidden_[0] == 0 || hidden_[1] == 0)
      throw UsageError("gate hidden sizes must be positive");
  } else {
    throw UsageError("moe.hidden needs exactly two sizes");
  }
}

void MoeGates::register_params(TensorMap& params, std::uint64_t seed) const {
  Rng rng(seed);
  const auto init = [&](Tensor& t, std::size_t fan_in) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : t.v) x = scale * rng.gaussian();
  };
  const std::size_t h1 = hidden_[0], h2 = hidden_[1];
  if (cfg_.shared_gate) {
    init(params.add(std::string(kShared) + "W0", {h1, 3 * d_f_}), 3 * d_f_);
    params.add(std::string(kShared) + "b0", {h1});
    init(params.add(std::string(kShared) + "W1", {h2, h1}), h1);
    params.add(std::string(kShared) + "b1", {h2});
    init(params.add(std::string(kShared) + "W2", {3, h2}), h2);
    params.add(std::string(kShared) + "b2", {3});
    return;
  }
  for (std::size_t g = 0; g < 3; ++g) {
    init(params.add(gate_tensor(g, "W0"), {h1, d_f_}), d_f_);
    params.add(gate_tensor(g, "b0"), {h1});
    init(params.add(gate_tensor(g, "W1"), {h2, h1}), h1);
    params.add(gate_tensor(g, "b1"), {h2});
    init(params.add(gate_tensor(g, "W2"), {1, h2}), h2);
    params.add(gate_tensor(g, "b2"), {1});
  }
}

void MoeGates::validate_params(const TensorMap& params) const {
  const std::size_t h1 = hidden_[0], h2 = hidden_[1];
  const auto check = [&](const std::string& name, std::vector<std::size_t> shape) {
    if (!params.contains(name) || params.at(name).shape != shape)
      throw DimensionMismatch("gate tensor missing or misshaped: " + name);
  };
  if (cfg_.shared_gate) {
    check(std::string(kShared) + "W0", {h1, 3 * d_f_});
    check(std::string(kShared) + "W1", {h2, h1});
    check(std::string(kShared) + "W2", {3, h2});
    return;
  }
  for (std::size_t g = 0; g < 3; ++g) {
    check(gate_tensor(g, "W0"), {h1, d_f_});
    check(gate_tensor(g, "W1"), {h2, h1});
    check(gate_tensor(g, "W2"), {1, h2});
  }
}

namespace {

// out = tanh(W x + b)
void affine_tanh(const Tensor& w, const Tensor& b, const std::vector<double>& x,
                 std::vector<double>& out) {
  const std::size_t rows = w.rows(), cols = w.cols();
  out.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    double a = b.v[i];
    const double* wr = &w.v[i * cols];
    for (std::size_t j = 0; j < cols; ++j) a += wr[j] * x[j];
    out[i] = std::tanh(a);
  }
}

// backward of affine+tanh: returns dx, accumulates dW/db
void affine_tanh_backward(const Tensor& w, const std::vector<double>& x,
                          const std::vector<double>& out,
                          const std::vector<double>& dout, Tensor& gw, Tensor& gb,
                          std::vector<double>& dx) {
  const std::size_t rows = w.rows(), cols = w.cols();
  dx.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    const double da = dout[i] * (1.0 - out[i] * out[i]);
    gb.v[i] += da;
    double* gr = &gw.v[i * cols];
    const double* wr = &w.v[i * cols];
    for (std::size_t j = 0; j < cols; ++j) {
      gr[j] += da * x[j];
      dx[j] += da * wr[j];
    }
  }
}

}  // namespace

TaskWeights MoeGates::forward(const TensorMap& params,
                              const std::array<std::vector<double>, 3>& features,
                              Cache* cache) const {
  for (const auto& f : features)
    if (f.size() != d_f_)
      throw DimensionMismatch("gate feature size " + std::to_string(f.size()) +
                              " vs expected " + std::to_string(d_f_));
  Cache local;
  Cache& c = cache ? *cache : local;
  c.input = features;

  if (cfg_.shared_gate) {
    c.shared_input.clear();
    c.shared_input.reserve(3 * d_f_);
    for (const auto& f : features)
      c.shared_input.insert(c.shared_input.end(), f.begin(), f.end());
    affine_tanh(params.at(std::string(kShared) + "W0"),
                params.at(std::string(kShared) + "b0"), c.shared_input, c.h1[0]);
    affine_tanh(params.at(std::string(kShared) + "W1"),
                params.at(std::string(kShared) + "b1"), c.h1[0], c.h2[0]);
    const Tensor& w2 = params.at(std::string(kShared) + "W2");
    const Tensor& b2 = params.at(std::string(kShared) + "b2");
    for (std::size_t i = 0; i < 3; ++i) {
      double a = b2.v[i];
      const double* wr = &w2.v[i * w2.cols()];
      for (std::size_t j = 0; j < w2.cols(); ++j) a += wr[j] * c.h2[0][j];
      c.logits[i] = a;
    }
  } else {
    for (std::size_t g = 0; g < 3; ++g) {
      affine_tanh(params.at(gate_tensor(g, "W0")), params.at(gate_tensor(g, "b0")),
                  features[g], c.h1[g]);
      affine_tanh(params.at(gate_tensor(g, "W1")), params.at(gate_tensor(g, "b1")),
                  c.h1[g], c.h2[g]);
      const Tensor& w2 = params.at(gate_tensor(g, "W2"));
      double a = params.at(gate_tensor(g, "b2")).v[0];
      for (std::size_t j = 0; j < w2.cols(); ++j) a += w2.v[j] * c.h2[g][j];
      c.logits[g] = a;
    }
  }
  c.alpha = softmax3(c.logits);
  return TaskWeights::from_alphas(c.alpha);
}

void MoeGates::backward(const TensorMap& params, const Cache& cache,
                        const std::array<double, 3>& d_alpha, TensorMap& grads,
                        std::array<std::vector<double>, 3>& d_features) const {
  // softmax jacobian: dlogit_i = alpha_i * (g_i - sum_j alpha_j g_j)
  double mix = 0.0;
  for (std::size_t i = 0; i < 3; ++i) mix += cache.alpha[i] * d_alpha[i];
  std::array<double, 3> d_logits{};
  for (std::size_t i = 0; i < 3; ++i)
    d_logits[i] = cache.alpha[i] * (d_alpha[i] - mix);

  for (auto& f : d_features) f.assign(d_f_, 0.0);

  if (cfg_.shared_gate) {
    const Tensor& w2 = params.at(std::string(kShared) + "W2");
    Tensor& gw2 = grads.at(std::string(kShared) + "W2");
    Tensor& gb2 = grads.at(std::string(kShared) + "b2");
    std::vector<double> dh2(w2.cols(), 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
      gb2.v[i] += d_logits[i];
      for (std::size_t j = 0; j < w2.cols(); ++j) {
        gw2.v[i * w2.cols() + j] += d_logits[i] * cache.h2[0][j];
        dh2[j] += d_logits[i] * w2.v[i * w2.cols() + j];
      }
    }
    std::vector<double> dh1, dinput;
    affine_tanh_backward(params.at(std::string(kShared) + "W1"), cache.h1[0],
                         cache.h2[0], dh2, grads.at(std::string(kShared) + "W1"),
                         grads.at(std::string(kShared) + "b1"), dh1);
    affine_tanh_backward(params.at(std::string(kShared) + "W0"), cache.shared_input,
                         cache.h1[0], dh1, grads.at(std::string(kShared) + "W0"),
                         grads.at(std::string(kShared) + "b0"), dinput);
    for (std::size_t g = 0; g < 3; ++g)
      for (std::size_t j = 0; j < d_f_; ++j)
        d_features[g][j] = dinput[g * d_f_ + j];
    return;
  }

  for (std::size_t g = 0; g < 3; ++g) {
    const Tensor& w2 = params.at(gate_tensor(g, "W2"));
    Tensor& gw2 = grads.at(gate_tensor(g, "W2"));
    Tensor& gb2 = grads.at(gate_tensor(g, "b2"));
    gb2.v[0] += d_logits[g];
    std::vector<double> dh2(w2.cols());
    for (std::size_t j = 0; j < w2.cols(); ++j) {
      gw2.v[j] += d_logits[g] * cache.h2[g][j];
      dh2[j] = d_logits[g] * w2.v[j];
    }
    std::vector<double> dh1;
    affine_tanh_backward(params.at(gate_tensor(g, "W1")), cache.h1[g], cache.h2[g],
                         dh2, grads.at(gate_tensor(g, "W1")),
                         grads.at(gate_tensor(g, "b1")), dh1);
    affine_tanh_backward(params.at(gate_tensor(g, "W0")), cache.input[g], cache.h1[g],
                         dh1, grads.at(gate_tensor(g, "W0")),
                         grads.at(gate_tensor(g, "b0")), d_features[g]);
  }
}

}  // namespace fse
