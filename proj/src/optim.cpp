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

#include "langclust/optim.hpp"

#include <algorithm>
#include <cmath>

#include "langclust/error.hpp"

namespace langclust {

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size()) {
    fail(ErrorKind::kDimension, "adam_step: parameter/gradient count mismatch");
  }
  if (state.first_moment.empty() && !params.empty()) {
    for (const Tensor* p : params) {
      state.first_moment.emplace_back(p->shape(), 0.0);
      state.second_moment.emplace_back(p->shape(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    fail(ErrorKind::kDimension, "adam_step: state tracks a different parameter set");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape() ||
        params[i]->shape() != state.first_moment[i].shape()) {
      fail(ErrorKind::kDimension, "adam_step: shape mismatch for parameter " +
                                      std::to_string(i) + " " +
                                      shape_string(params[i]->shape()));
    }
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->raw();
    const double* g = grads[i]->raw();
    double* m = state.first_moment[i].raw();
    double* v = state.second_moment[i].raw();
    for (std::size_t j = 0; j < params[i]->size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

void adam_step(std::span<Var> params, AdamState& state, double lr) {
  std::vector<Tensor*> values;
  std::vector<const Tensor*> grads;
  values.reserve(params.size());
  grads.reserve(params.size());
  for (auto& p : params) {
    values.push_back(&p.mutable_value());
    grads.push_back(&p.mutable_grad());
  }
  adam_step(values, grads, state, lr);
}

double noam_lr(const LrSchedule& schedule, std::uint64_t step) {
  if (step == 0) fail(ErrorKind::kDomain, "noam_lr: step must be >= 1");
  if (schedule.warmup_steps == 0 || schedule.d_model == 0) {
    fail(ErrorKind::kDomain, "noam_lr: d_model and warmup_steps must be positive");
  }
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(schedule.warmup_steps);
  return std::pow(static_cast<double>(schedule.d_model), -0.5) *
         std::min(std::pow(s, -0.5), s * std::pow(w, -1.5));
}

double clip_grad_norm(std::span<Var> params, double max_norm) {
  double sq = 0.0;
  for (auto& p : params) {
    for (double g : p.grad().data()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto& p : params) {
      for (double& g : p.mutable_grad().data()) g *= factor;
    }
  }
  return norm;
}

}  // namespace langclust
