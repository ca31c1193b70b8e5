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

#include <cstdint>
#include <span>
#include <vector>

#include "langclust/tensor.hpp"

namespace langclust {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  std::uint64_t step_count = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

/// One bias-corrected Adam update of `params` in place. Moments are created
/// lazily on the first call and must keep matching the parameter shapes.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads,
               AdamState& state, double lr);

/// Convenience overload over autodiff parameters, reading their gradients.
void adam_step(std::span<Var> params, AdamState& state, double lr);

/// Inverse square root schedule with linear warmup.
struct LrSchedule {
  std::uint64_t d_model = 256;
  std::uint64_t warmup_steps = 4000;
};

double noam_lr(const LrSchedule& schedule, std::uint64_t step);

/// Rescales gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(std::span<Var> params, double max_norm);

}  // namespace langclust
