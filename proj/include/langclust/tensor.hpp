// Copyright 2026 The langclust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace langclust {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles. Plain value type; autodiff lives in Var.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  double* raw() noexcept { return data_.data(); }
  const double* raw() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Value of a single-element tensor.
  double item() const;

  bool all_finite() const noexcept;
  Tensor reshaped(Shape shape) const;
  void fill(double value);

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

struct Node;

/// Handle to a node of the dynamic autodiff tape. Copies share the node.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  const Tensor& value() const;
  /// Direct access for optimizer updates; never used inside a recorded pass.
  Tensor& mutable_value();
  const Tensor& grad() const;
  Tensor& mutable_grad();
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;
  bool defined() const noexcept { return node_ != nullptr; }
  void zero_grad();

  const std::shared_ptr<Node>& node() const noexcept { return node_; }
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<Node> node_;
};

struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::uint64_t sequence = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  /// Adds `g` into grad, allocating zeros on first use.
  void accumulate(std::span<const double> g);
  Tensor& grad_buffer();
};

/// Reverse sweep from a single-element loss. Gradients accumulate into every
/// reachable node that requires grad; call zero_grad on parameters between
/// steps.
void backward(const Var& loss);

bool grad_enabled() noexcept;

/// Disables tape recording on this thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace ops {

/// [M,K] x [K,N] -> [M,N]
Var matmul(const Var& a, const Var& b);
/// Batched product over the leading axis: [G,M,K] x [G,K,N], or with
/// transpose_b, [G,M,K] x [G,N,K]^T.
Var bmm(const Var& a, const Var& b, bool transpose_b = false);
/// Elementwise sum; `b` may also be a trailing-suffix broadcast of `a`
/// (bias rows, positional tables).
Var add(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var relu(const Var& a);
Var softmax(const Var& x, int axis);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta,
               double epsilon = 1e-6);
/// Rows of `table` ([V,D]) gathered by id -> [ids.size(), D].
Var embedding(const Var& table, std::span<const std::size_t> ids);
Var reshape(const Var& x, Shape shape);
Var permute(const Var& x, std::span<const std::size_t> axes);
Var sum(const Var& x);
/// Mean over non-ignored rows of -log softmax(logits)[target].
Var cross_entropy(const Var& logits, std::span<const std::size_t> targets,
                  std::size_t ignore_index = static_cast<std::size_t>(-1));
/// Inverted dropout with a caller-provided keep mask (1/(1-p) or 0).
Var apply_mask(const Var& x, const Tensor& mask);

}  // namespace ops

/// Plain forward softmax used outside the tape (decoding, tests).
Tensor softmax(const Tensor& x, int axis);
double cross_entropy(const Tensor& logits, std::span<const std::size_t> targets);

}  // namespace langclust
