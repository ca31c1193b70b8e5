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

#include "langclust/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "langclust/error.hpp"

namespace langclust {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    fail(ErrorKind::kDimension, "tensor shape " + shape_string(shape_) +
                                    " does not match " +
                                    std::to_string(data_.size()) + " values");
  }
}

double Tensor::item() const {
  if (data_.size() != 1) {
    fail(ErrorKind::kDimension,
         "item() on tensor of shape " + shape_string(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    fail(ErrorKind::kDimension, "cannot reshape " + shape_string(shape_) +
                                    " to " + shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

// ---------------------------------------------------------------------------
// Tape

namespace {

std::atomic<std::uint64_t> g_sequence{0};
thread_local bool t_grad_enabled = true;

}  // namespace

bool grad_enabled() noexcept { return t_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }

Tensor& Node::grad_buffer() {
  if (grad.size() != value.size()) grad = Tensor(value.shape(), 0.0);
  return grad;
}

void Node::accumulate(std::span<const double> g) {
  auto& buf = grad_buffer();
  double* dst = buf.raw();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
  node_->sequence = g_sequence.fetch_add(1);
}

const Tensor& Var::value() const { return node_->value; }
Tensor& Var::mutable_value() { return node_->value; }
const Tensor& Var::grad() const { return node_->grad_buffer(); }
Tensor& Var::mutable_grad() { return node_->grad_buffer(); }
bool Var::requires_grad() const { return node_ && node_->requires_grad; }
void Var::zero_grad() {
  if (node_) node_->grad = Tensor();
}

void backward(const Var& loss) {
  if (!loss.defined() || loss.value().size() != 1) {
    fail(ErrorKind::kDimension,
         "backward() needs a scalar loss, got shape " +
             (loss.defined() ? shape_string(loss.shape()) : std::string("<undefined>")));
  }
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<Node*> stack{loss.node().get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!n->requires_grad || !seen.insert(n).second) continue;
    order.push_back(n);
    for (auto& p : n->parents) stack.push_back(p.get());
  }
  std::sort(order.begin(), order.end(),
            [](const Node* a, const Node* b) { return a->sequence > b->sequence; });
  const double one = 1.0;
  loss.node()->accumulate(std::span<const double>(&one, 1));
  for (Node* n : order) {
    if (n->backward_fn && n->grad.size() == n->value.size()) n->backward_fn(*n);
  }
}

namespace detail {

Var make_result(Tensor value, std::vector<std::shared_ptr<Node>> parents,
                std::function<void(Node&)> fn) {
  Var out(std::move(value), false);
  if (!t_grad_enabled) return out;
  bool any = std::any_of(parents.begin(), parents.end(),
                         [](const auto& p) { return p->requires_grad; });
  if (!any) return out;
  auto& node = *out.node();
  node.requires_grad = true;
  node.parents = std::move(parents);
  node.backward_fn = std::move(fn);
  return out;
}

}  // namespace detail

}  // namespace langclust
