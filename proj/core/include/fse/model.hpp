#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fse/nn.hpp"
#include "fse/tasks.hpp"

namespace fse {

// Whitespace-segmented vocabulary. Canonical formulas carry no spaces, so a
// whole formula is one token. PAD is index 0, UNK index 1.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  static std::vector<std::string> split_tokens(const std::string& text);
  static Vocab build(const std::vector<std::string>& texts, std::size_t min_freq);
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::vector<int> encode(const std::string& text) const;
  int token_id(const std::string& tok) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct ModelConfig {
  std::size_t dim = 64;     // embedding and hidden width
  std::size_t layers = 2;   // position-wise tanh transform layers
  std::size_t min_freq = 2; // vocab cutoff when building from texts
};

// Shared bi-encoder with one affine scoring head per task. The interaction
// features are symmetric in (u, v) -- [u+v; |u-v|; u*v] -- so a pair scores
// identically in either order.
class Model {
 public:
  Model(Vocab vocab, ModelConfig cfg, std::uint64_t init_seed);
  // checkpoint reload path: tensors supplied from outside
  Model(Vocab vocab, ModelConfig cfg, TensorMap params);

  const Vocab& vocab() const { return vocab_; }
  const ModelConfig& config() const { return cfg_; }
  TensorMap& params() { return params_; }
  const TensorMap& params() const { return params_; }
  std::size_t feature_dim() const { return 3 * cfg_.dim; }

  // Deterministic embedding, mean-pooled over non-PAD positions. An empty or
  // all-PAD id list embeds as a single UNK.
  std::vector<double> encode_ids(std::span<const int> ids) const;
  std::vector<double> encode(const std::string& text) const;

  double score_embeddings(TaskId task, std::span<const double> u,
                          std::span<const double> v) const;
  double score_pair(TaskId task, const std::string& left,
                    const std::string& right) const;

  struct TaskLossResult {
    double loss = 0.0;                // mean binary cross-entropy
    std::vector<double> feature;      // batch-mean interaction vector
  };
  TaskLossResult task_loss(const TaskBatch& batch) const;  // throws EmptyBatch

  // -- training internals ----------------------------------------------------
  struct TextCache {
    std::vector<int> ids;                   // effective (non-PAD) ids
    std::vector<std::vector<double>> h;     // layer activations, n*dim each
    std::vector<double> pooled;
  };
  struct PairCache {
    TextCache left, right;
    std::vector<double> z;  // interaction features, 3*dim
    double logit = 0.0;
    double prob = 0.5;
  };

  TextCache forward_text(const std::string& text) const;
  PairCache forward_pair(TaskId task, const TaskPair& pair) const;

  // Accumulates exact gradients for one pair: d_logit flows through the head,
  // dz_extra (may be empty) adds the feature-path contribution straight into
  // the interaction vector.
  void backward_pair(TaskId task, const PairCache& cache, double d_logit,
                     std::span<const double> dz_extra, TensorMap& grads) const;

 private:
  void encode_positions(TextCache& tc) const;

  Vocab vocab_;
  ModelConfig cfg_;
  TensorMap params_;
};

double sigmoid(double x);
// ln(1 + e^x) without overflow
double softplus(double x);

}  // namespace fse
