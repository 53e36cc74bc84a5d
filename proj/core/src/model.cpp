#include "fse/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fse/errors.hpp"
#include "fse/rng.hpp"

namespace fse {

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  Tensor t;
  t.shape = std::move(shape);
  t.v.assign(n, 0.0);
  return t;
}

Tensor& TensorMap::add(const std::string& name, std::vector<std::size_t> shape) {
  auto [it, inserted] = t_.emplace(name, Tensor::zeros(std::move(shape)));
  if (!inserted) throw DataError("tensor already registered: " + name);
  return it->second;
}

Tensor& TensorMap::at(const std::string& name) {
  auto it = t_.find(name);
  if (it == t_.end()) throw DataError("unknown tensor: " + name);
  return it->second;
}

const Tensor& TensorMap::at(const std::string& name) const {
  auto it = t_.find(name);
  if (it == t_.end()) throw DataError("unknown tensor: " + name);
  return it->second;
}

TensorMap TensorMap::zeros_like() const {
  TensorMap out;
  for (const auto& [name, t] : t_) out.add(name, t.shape);
  return out;
}

void TensorMap::zero_all() {
  for (auto& [name, t] : t_) std::fill(t.v.begin(), t.v.end(), 0.0);
}

bool TensorMap::all_finite() const {
  for (const auto& [name, t] : t_)
    for (double x : t.v)
      if (!std::isfinite(x)) return false;
  return true;
}

double sigmoid(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 30.0) return x;
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

std::vector<std::string> Vocab::split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

Vocab Vocab::build(const std::vector<std::string>& texts, std::size_t min_freq) {
  std::map<std::string, std::size_t> freq;
  for (const auto& t : texts)
    for (auto& tok : split_tokens(t)) ++freq[tok];
  std::vector<std::string> tokens = {"<pad>", "<unk>"};
  for (const auto& [tok, n] : freq)
    if (n >= min_freq) tokens.push_back(tok);
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[0] != "<pad>" || tokens[1] != "<unk>")
    throw DataError("vocab must start with <pad>, <unk>");
  Vocab v;
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i)
    v.index_.emplace(v.tokens_[i], static_cast<int>(i));
  if (v.index_.size() != v.tokens_.size()) throw DataError("vocab has duplicates");
  return v;
}

int Vocab::token_id(const std::string& tok) const {
  auto it = index_.find(tok);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(const std::string& text) const {
  std::vector<int> out;
  for (const auto& tok : split_tokens(text)) out.push_back(token_id(tok));
  return out;
}

namespace {

const char* head_weight_name(TaskId t) {
  switch (t) {
    case TaskId::T1:
      return "head.T1.w";
    case TaskId::T2:
      return "head.T2.w";
    default:
      return "head.T3.w";
  }
}

const char* head_bias_name(TaskId t) {
  switch (t) {
    case TaskId::T1:
      return "head.T1.b";
    case TaskId::T2:
      return "head.T2.b";
    default:
      return "head.T3.b";
  }
}

}  // namespace

Model::Model(Vocab vocab, ModelConfig cfg, std::uint64_t init_seed)
    : vocab_(std::move(vocab)), cfg_(cfg) {
  if (cfg_.dim == 0) throw UsageError("model dim must be positive");
  Rng rng(init_seed);
  const std::size_t d = cfg_.dim;
  Tensor& emb = params_.add("embed", {vocab_.size(), d});
  for (double& x : emb.v) x = 0.1 * rng.gaussian();
  std::fill(emb.v.begin(), emb.v.begin() + static_cast<std::ptrdiff_t>(d), 0.0);  // PAD row
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    Tensor& w = params_.add("enc." + std::to_string(l) + ".W", {d, d});
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& x : w.v) x = scale * rng.gaussian();
    params_.add("enc." + std::to_string(l) + ".b", {d});
  }
  for (TaskId t : {TaskId::T1, TaskId::T2, TaskId::T3}) {
    Tensor& w = params_.add(head_weight_name(t), {3 * d});
    const double scale = 0.5 / std::sqrt(static_cast<double>(3 * d));
    for (double& x : w.v) x = scale * rng.gaussian();
    params_.add(head_bias_name(t), {1});
  }
}

Model::Model(Vocab vocab, ModelConfig cfg, TensorMap params)
    : vocab_(std::move(vocab)), cfg_(cfg), params_(std::move(params)) {
  const std::size_t d = cfg_.dim;
  if (params_.at("embed").shape != std::vector<std::size_t>{vocab_.size(), d})
    throw DimensionMismatch("embed tensor vs vocab/config");
}

void Model::encode_positions(TextCache& tc) const {
  const std::size_t d = cfg_.dim;
  const std::size_t n = tc.ids.size();
  const Tensor& emb = params_.at("embed");
  tc.h.assign(cfg_.layers + 1, std::vector<double>(n * d));
  for (std::size_t p = 0; p < n; ++p) {
    const double* row = &emb.v[static_cast<std::size_t>(tc.ids[p]) * d];
    std::copy(row, row + d, tc.h[0].begin() + static_cast<std::ptrdiff_t>(p * d));
  }
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    const Tensor& w = params_.at("enc." + std::to_string(l) + ".W");
    const Tensor& b = params_.at("enc." + std::to_string(l) + ".b");
    for (std::size_t p = 0; p < n; ++p) {
      const double* hin = &tc.h[l][p * d];
      double* hout = &tc.h[l + 1][p * d];
      for (std::size_t i = 0; i < d; ++i) {
        double a = b.v[i];
        const double* wrow = &w.v[i * d];
        for (std::size_t j = 0; j < d; ++j) a += wrow[j] * hin[j];
        hout[i] = std::tanh(a);
      }
    }
  }
  tc.pooled.assign(d, 0.0);
  const auto& top = tc.h[cfg_.layers];
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t i = 0; i < d; ++i) tc.pooled[i] += top[p * d + i];
  for (double& x : tc.pooled) x /= static_cast<double>(n);
}

Model::TextCache Model::forward_text(const std::string& text) const {
  TextCache tc;
  for (int id : vocab_.encode(text))
    if (id != Vocab::kPad) tc.ids.push_back(id);
  if (tc.ids.empty()) tc.ids.push_back(Vocab::kUnk);
  encode_positions(tc);
  return tc;
}

std::vector<double> Model::encode_ids(std::span<const int> ids) const {
  TextCache tc;
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size())
      throw DataError("token id out of range");
    if (id != Vocab::kPad) tc.ids.push_back(id);
  }
  if (tc.ids.empty()) tc.ids.push_back(Vocab::kUnk);
  encode_positions(tc);
  return tc.pooled;
}

std::vector<double> Model::encode(const std::string& text) const {
  return forward_text(text).pooled;
}

double Model::score_embeddings(TaskId task, std::span<const double> u,
                               std::span<const double> v) const {
  const std::size_t d = cfg_.dim;
  if (u.size() != d || v.size() != d) throw DimensionMismatch("embedding size");
  const Tensor& w = params_.at(head_weight_name(task));
  const Tensor& b = params_.at(head_bias_name(task));
  double logit = b.v[0];
  for (std::size_t i = 0; i < d; ++i) {
    logit += w.v[i] * (u[i] + v[i]);
    logit += w.v[d + i] * std::abs(u[i] - v[i]);
    logit += w.v[2 * d + i] * (u[i] * v[i]);
  }
  return sigmoid(logit);
}

double Model::score_pair(TaskId task, const std::string& left,
                         const std::string& right) const {
  const auto u = encode(left);
  const auto v = encode(right);
  return score_embeddings(task, u, v);
}

Model::PairCache Model::forward_pair(TaskId task, const TaskPair& pair) const {
  PairCache pc;
  pc.left = forward_text(pair.left);
  pc.right = forward_text(pair.right);
  const std::size_t d = cfg_.dim;
  pc.z.resize(3 * d);
  const auto& u = pc.left.pooled;
  const auto& v = pc.right.pooled;
  for (std::size_t i = 0; i < d; ++i) {
    pc.z[i] = u[i] + v[i];
    pc.z[d + i] = std::abs(u[i] - v[i]);
    pc.z[2 * d + i] = u[i] * v[i];
  }
  const Tensor& w = params_.at(head_weight_name(task));
  const Tensor& b = params_.at(head_bias_name(task));
  double logit = b.v[0];
  for (std::size_t i = 0; i < 3 * d; ++i) logit += w.v[i] * pc.z[i];
  pc.logit = logit;
  pc.prob = sigmoid(logit);
  return pc;
}

Model::TaskLossResult Model::task_loss(const TaskBatch& batch) const {
  if (batch.pairs.empty()) throw EmptyBatch();
  TaskLossResult r;
  r.feature.assign(feature_dim(), 0.0);
  for (const TaskPair* p : batch.pairs) {
    PairCache pc = forward_pair(batch.task, *p);
    r.loss += softplus(pc.logit) - static_cast<double>(p->label) * pc.logit;
    for (std::size_t i = 0; i < pc.z.size(); ++i) r.feature[i] += pc.z[i];
  }
  const double n = static_cast<double>(batch.pairs.size());
  r.loss /= n;
  for (double& x : r.feature) x /= n;
  return r;
}

namespace {

// d|x| at 0 is taken as 0; the matching central difference of |.| at 0 is 0
// as well, so the gradient check stays consistent.
double sgn(double x) { return x > 0 ? 1.0 : x < 0 ? -1.0 : 0.0; }

}  // namespace

void Model::backward_pair(TaskId task, const PairCache& cache, double d_logit,
                          std::span<const double> dz_extra, TensorMap& grads) const {
  const std::size_t d = cfg_.dim;
  const Tensor& w = params_.at(head_weight_name(task));

  // head
  Tensor& gw = grads.at(head_weight_name(task));
  Tensor& gb = grads.at(head_bias_name(task));
  for (std::size_t i = 0; i < 3 * d; ++i) gw.v[i] += d_logit * cache.z[i];
  gb.v[0] += d_logit;

  // interaction vector
  std::vector<double> dz(3 * d);
  for (std::size_t i = 0; i < 3 * d; ++i) {
    dz[i] = d_logit * w.v[i];
    if (!dz_extra.empty()) dz[i] += dz_extra[i];
  }

  const auto& u = cache.left.pooled;
  const auto& v = cache.right.pooled;
  std::vector<double> du(d), dv(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double s = sgn(u[i] - v[i]);
    du[i] = dz[i] + dz[d + i] * s + dz[2 * d + i] * v[i];
    dv[i] = dz[i] - dz[d + i] * s + dz[2 * d + i] * u[i];
  }

  // encoder, both sides
  const auto backprop_text = [&](const TextCache& tc, const std::vector<double>& dpool) {
    const std::size_t n = tc.ids.size();
    std::vector<double> dh(n * d);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t i = 0; i < d; ++i) dh[p * d + i] = dpool[i] * inv_n;

    for (std::size_t l = cfg_.layers; l-- > 0;) {
      const Tensor& wl = params_.at("enc." + std::to_string(l) + ".W");
      Tensor& gwl = grads.at("enc." + std::to_string(l) + ".W");
      Tensor& gbl = grads.at("enc." + std::to_string(l) + ".b");
      std::vector<double> dh_prev(n * d, 0.0);
      for (std::size_t p = 0; p < n; ++p) {
        const double* hout = &tc.h[l + 1][p * d];
        const double* hin = &tc.h[l][p * d];
        for (std::size_t i = 0; i < d; ++i) {
          const double da = dh[p * d + i] * (1.0 - hout[i] * hout[i]);
          gbl.v[i] += da;
          double* gw_row = &gwl.v[i * d];
          const double* w_row = &wl.v[i * d];
          for (std::size_t j = 0; j < d; ++j) {
            gw_row[j] += da * hin[j];
            dh_prev[p * d + j] += da * w_row[j];
          }
        }
      }
      dh.swap(dh_prev);
    }

    Tensor& gemb = grads.at("embed");
    for (std::size_t p = 0; p < n; ++p) {
      double* grow = &gemb.v[static_cast<std::size_t>(tc.ids[p]) * d];
      for (std::size_t i = 0; i < d; ++i) grow[i] += dh[p * d + i];
    }
  };
  backprop_text(cache.left, du);
  backprop_text(cache.right, dv);
}

}  // namespace fse
