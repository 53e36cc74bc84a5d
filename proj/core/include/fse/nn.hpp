#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace fse {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> v;

  static Tensor zeros(std::vector<std::size_t> shape);
  std::size_t numel() const { return v.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(std::size_t r, std::size_t c) { return v[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols() + c]; }

  bool operator==(const Tensor&) const = default;
};

// Named tensors with deterministic iteration order; parameters, gradients and
// optimizer moments all share this layout so they can be walked in lockstep.
class TensorMap {
 public:
  Tensor& add(const std::string& name, std::vector<std::size_t> shape);
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return t_.count(name) > 0; }

  auto begin() { return t_.begin(); }
  auto end() { return t_.end(); }
  auto begin() const { return t_.begin(); }
  auto end() const { return t_.end(); }
  std::size_t size() const { return t_.size(); }

  // zeroed copy with the same names and shapes
  TensorMap zeros_like() const;
  void zero_all();
  bool all_finite() const;

  bool operator==(const TensorMap&) const = default;

 private:
  std::map<std::string, Tensor> t_;
};

}  // namespace fse
