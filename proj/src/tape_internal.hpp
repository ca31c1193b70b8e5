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

#include "langclust/tensor.hpp"

namespace langclust::detail {

/// Wraps a forward value as a tape node. The node is recorded only when grad
/// mode is on and some parent requires grad.
Var make_result(Tensor value, std::vector<std::shared_ptr<Node>> parents,
                std::function<void(Node&)> fn);

}  // namespace langclust::detail
