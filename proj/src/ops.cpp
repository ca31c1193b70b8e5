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

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "langclust/error.hpp"
#include "langclust/tensor.hpp"
#include "tape_internal.hpp"

namespace langclust {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

using detail::make_result;

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    fail(ErrorKind::kDimension, std::string(op) + ": expected rank " +
                                    std::to_string(rank) + ", got " +
                                    shape_string(x.shape()));
  }
}

// `b` broadcasts onto `a` when it equals a trailing suffix of a's shape.
std::size_t broadcast_inner(const Shape& a, const Shape& b, const char* op) {
  bool ok = b.size() <= a.size() &&
            std::equal(b.begin(), b.end(), a.end() - static_cast<long>(b.size()));
  if (!ok) {
    fail(ErrorKind::kDimension, std::string(op) + ": cannot broadcast " +
                                    shape_string(b) + " onto " + shape_string(a));
  }
  return shape_size(b);
}

struct AxisLayout {
  std::size_t outer, length, inner;
};

AxisLayout axis_layout(const Shape& shape, int axis, const char* op) {
  const int rank = static_cast<int>(shape.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    fail(ErrorKind::kDimension, std::string(op) + ": axis out of range for " +
                                    shape_string(shape));
  }
  AxisLayout l{1, shape[static_cast<std::size_t>(axis)], 1};
  for (int i = 0; i < axis; ++i) l.outer *= shape[static_cast<std::size_t>(i)];
  for (int i = axis + 1; i < rank; ++i) l.inner *= shape[static_cast<std::size_t>(i)];
  return l;
}

void softmax_kernel(const double* x, double* y, const AxisLayout& l) {
  for (std::size_t o = 0; o < l.outer; ++o) {
    for (std::size_t in = 0; in < l.inner; ++in) {
      const std::size_t base = o * l.length * l.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < l.length; ++k) mx = std::max(mx, x[base + k * l.inner]);
      double total = 0.0;
      for (std::size_t k = 0; k < l.length; ++k) {
        const double e = std::exp(x[base + k * l.inner] - mx);
        y[base + k * l.inner] = e;
        total += e;
      }
      for (std::size_t k = 0; k < l.length; ++k) y[base + k * l.inner] /= total;
    }
  }
}

}  // namespace

Tensor softmax(const Tensor& x, int axis) {
  auto layout = axis_layout(x.shape(), axis, "softmax");
  Tensor y(x.shape());
  softmax_kernel(x.raw(), y.raw(), layout);
  return y;
}

double cross_entropy(const Tensor& logits, std::span<const std::size_t> targets) {
  NoGradGuard guard;
  return ops::cross_entropy(Var(logits), targets).value().item();
}

namespace ops {

Var matmul(const Var& a, const Var& b) {
  require_rank(a.value(), 2, "matmul");
  require_rank(b.value(), 2, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    fail(ErrorKind::kDimension, "matmul: inner dimensions differ " +
                                    shape_string(a.shape()) + " x " +
                                    shape_string(b.shape()));
  }
  Tensor out({m, n});
  MatMap(out.raw(), m, n).noalias() =
      ConstMatMap(a.value().raw(), m, k) * ConstMatMap(b.value().raw(), k, n);
  return make_result(std::move(out), {a.node(), b.node()}, [m, k, n](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    ConstMatMap g(self.grad.raw(), m, n);
    if (pa.requires_grad) {
      MatMap(pa.grad_buffer().raw(), m, k).noalias() +=
          g * ConstMatMap(pb.value.raw(), k, n).transpose();
    }
    if (pb.requires_grad) {
      MatMap(pb.grad_buffer().raw(), k, n).noalias() +=
          ConstMatMap(pa.value.raw(), m, k).transpose() * g;
    }
  });
}

Var bmm(const Var& a, const Var& b, bool transpose_b) {
  require_rank(a.value(), 3, "bmm");
  require_rank(b.value(), 3, "bmm");
  const std::size_t groups = a.shape()[0], m = a.shape()[1], k = a.shape()[2];
  const std::size_t n = transpose_b ? b.shape()[1] : b.shape()[2];
  const std::size_t bk = transpose_b ? b.shape()[2] : b.shape()[1];
  if (b.shape()[0] != groups || bk != k) {
    fail(ErrorKind::kDimension, "bmm: incompatible shapes " +
                                    shape_string(a.shape()) + " x " +
                                    shape_string(b.shape()));
  }
  const std::size_t br = transpose_b ? n : k, bc = transpose_b ? k : n;
  Tensor out({groups, m, n});
  for (std::size_t g = 0; g < groups; ++g) {
    ConstMatMap am(a.value().raw() + g * m * k, m, k);
    ConstMatMap bm(b.value().raw() + g * br * bc, br, bc);
    MatMap om(out.raw() + g * m * n, m, n);
    if (transpose_b) {
      om.noalias() = am * bm.transpose();
    } else {
      om.noalias() = am * bm;
    }
  }
  return make_result(
      std::move(out), {a.node(), b.node()},
      [groups, m, k, n, br, bc, transpose_b](Node& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        double* ga = pa.requires_grad ? pa.grad_buffer().raw() : nullptr;
        double* gb = pb.requires_grad ? pb.grad_buffer().raw() : nullptr;
        for (std::size_t g = 0; g < groups; ++g) {
          ConstMatMap go(self.grad.raw() + g * m * n, m, n);
          ConstMatMap am(pa.value.raw() + g * m * k, m, k);
          ConstMatMap bm(pb.value.raw() + g * br * bc, br, bc);
          if (ga) {
            MatMap gam(ga + g * m * k, m, k);
            if (transpose_b) {
              gam.noalias() += go * bm;
            } else {
              gam.noalias() += go * bm.transpose();
            }
          }
          if (gb) {
            MatMap gbm(gb + g * br * bc, br, bc);
            if (transpose_b) {
              gbm.noalias() += go.transpose() * am;
            } else {
              gbm.noalias() += am.transpose() * go;
            }
          }
        }
      });
}

Var add(const Var& a, const Var& b) {
  const std::size_t inner = broadcast_inner(a.shape(), b.shape(), "add");
  Tensor out = a.value();
  const double* bv = b.value().raw();
  double* ov = out.raw();
  const std::size_t total = out.size();
  for (std::size_t i = 0; i < total; ++i) ov[i] += bv[i % inner];
  return make_result(std::move(out), {a.node(), b.node()}, [inner](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) pa.accumulate(self.grad.data());
    if (pb.requires_grad) {
      double* gb = pb.grad_buffer().raw();
      const double* g = self.grad.raw();
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i % inner] += g[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  const std::size_t inner = broadcast_inner(a.shape(), b.shape(), "mul");
  Tensor out = a.value();
  const double* bv = b.value().raw();
  double* ov = out.raw();
  for (std::size_t i = 0; i < out.size(); ++i) ov[i] *= bv[i % inner];
  return make_result(std::move(out), {a.node(), b.node()}, [inner](Node& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    const double* g = self.grad.raw();
    const std::size_t total = self.grad.size();
    if (pa.requires_grad) {
      double* ga = pa.grad_buffer().raw();
      const double* bv = pb.value.raw();
      for (std::size_t i = 0; i < total; ++i) ga[i] += g[i] * bv[i % inner];
    }
    if (pb.requires_grad) {
      double* gb = pb.grad_buffer().raw();
      const double* av = pa.value.raw();
      for (std::size_t i = 0; i < total; ++i) gb[i % inner] += g[i] * av[i];
    }
  });
}

Var scale(const Var& a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.data()) v *= factor;
  return make_result(std::move(out), {a.node()}, [factor](Node& self) {
    auto& pa = *self.parents[0];
    double* ga = pa.grad_buffer().raw();
    const double* g = self.grad.raw();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += factor * g[i];
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
  return make_result(std::move(out), {a.node()}, [](Node& self) {
    auto& pa = *self.parents[0];
    double* ga = pa.grad_buffer().raw();
    const double* g = self.grad.raw();
    const double* y = self.value.raw();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (y[i] > 0.0) ga[i] += g[i];
    }
  });
}

Var softmax(const Var& x, int axis) {
  const auto layout = axis_layout(x.shape(), axis, "softmax");
  Tensor out(x.shape());
  softmax_kernel(x.value().raw(), out.raw(), layout);
  return make_result(std::move(out), {x.node()}, [layout](Node& self) {
    auto& px = *self.parents[0];
    double* gx = px.grad_buffer().raw();
    const double* g = self.grad.raw();
    const double* y = self.value.raw();
    for (std::size_t o = 0; o < layout.outer; ++o) {
      for (std::size_t in = 0; in < layout.inner; ++in) {
        const std::size_t base = o * layout.length * layout.inner + in;
        double dot = 0.0;
        for (std::size_t k = 0; k < layout.length; ++k) {
          const std::size_t idx = base + k * layout.inner;
          dot += g[idx] * y[idx];
        }
        for (std::size_t k = 0; k < layout.length; ++k) {
          const std::size_t idx = base + k * layout.inner;
          gx[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double epsilon) {
  if (x.value().rank() < 1) fail(ErrorKind::kDimension, "layer_norm on scalar");
  const std::size_t width = x.shape().back();
  if (gamma.value().size() != width || beta.value().size() != width) {
    fail(ErrorKind::kDimension, "layer_norm: gain/bias width mismatch");
  }
  const std::size_t rows = x.value().size() / width;
  Tensor out(x.shape());
  std::vector<double> normalized(x.value().size());
  std::vector<double> inv_std(rows);
  const double* xv = x.value().raw();
  const double* gv = gamma.value().raw();
  const double* bv = beta.value().raw();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv + r * width;
    double mean = 0.0;
    for (std::size_t j = 0; j < width; ++j) mean += row[j];
    mean /= static_cast<double>(width);
    double var = 0.0;
    for (std::size_t j = 0; j < width; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<double>(width);
    inv_std[r] = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t j = 0; j < width; ++j) {
      const double h = (row[j] - mean) * inv_std[r];
      normalized[r * width + j] = h;
      out[r * width + j] = h * gv[j] + bv[j];
    }
  }
  return make_result(
      std::move(out), {x.node(), gamma.node(), beta.node()},
      [rows, width, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Node& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        const double* g = self.grad.raw();
        const double* gam = pg.value.raw();
        if (pg.requires_grad || pb.requires_grad) {
          double* gg = pg.requires_grad ? pg.grad_buffer().raw() : nullptr;
          double* gbeta = pb.requires_grad ? pb.grad_buffer().raw() : nullptr;
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < width; ++j) {
              const std::size_t i = r * width + j;
              if (gg) gg[j] += g[i] * normalized[i];
              if (gbeta) gbeta[j] += g[i];
            }
          }
        }
        if (px.requires_grad) {
          double* gx = px.grad_buffer().raw();
          const double n = static_cast<double>(width);
          for (std::size_t r = 0; r < rows; ++r) {
            double sum_d = 0.0, sum_dh = 0.0;
            for (std::size_t j = 0; j < width; ++j) {
              const std::size_t i = r * width + j;
              const double d = g[i] * gam[j];
              sum_d += d;
              sum_dh += d * normalized[i];
            }
            for (std::size_t j = 0; j < width; ++j) {
              const std::size_t i = r * width + j;
              const double d = g[i] * gam[j];
              gx[i] += inv_std[r] / n * (n * d - sum_d - normalized[i] * sum_dh);
            }
          }
        }
      });
}

Var embedding(const Var& table, std::span<const std::size_t> ids) {
  require_rank(table.value(), 2, "embedding");
  const std::size_t vocab = table.shape()[0], width = table.shape()[1];
  Tensor out({ids.size(), width});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= vocab) {
      fail(ErrorKind::kIndex, "embedding: id " + std::to_string(ids[r]) +
                                  " outside table of " + std::to_string(vocab));
    }
    std::copy_n(table.value().raw() + ids[r] * width, width, out.raw() + r * width);
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  return make_result(std::move(out), {table.node()},
                     [width, rows = std::move(rows)](Node& self) {
                       double* gt = self.parents[0]->grad_buffer().raw();
                       const double* g = self.grad.raw();
                       for (std::size_t r = 0; r < rows.size(); ++r) {
                         double* dst = gt + rows[r] * width;
                         const double* src = g + r * width;
                         for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
                       }
                     });
}

Var reshape(const Var& x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_result(std::move(out), {x.node()}, [](Node& self) {
    self.parents[0]->accumulate(self.grad.data());
  });
}

Var permute(const Var& x, std::span<const std::size_t> axes) {
  const Shape& in_shape = x.shape();
  const std::size_t rank = in_shape.size();
  if (axes.size() != rank) fail(ErrorKind::kDimension, "permute: rank mismatch");
  std::vector<bool> used(rank, false);
  for (auto a : axes) {
    if (a >= rank || used[a]) fail(ErrorKind::kDimension, "permute: invalid axes");
    used[a] = true;
  }
  std::vector<std::size_t> in_strides(rank, 1);
  for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
  Shape out_shape(rank);
  std::vector<std::size_t> src_strides(rank);
  for (std::size_t i = 0; i < rank; ++i) {
    out_shape[i] = in_shape[axes[i]];
    src_strides[i] = in_strides[axes[i]];
  }
  // Flat source offset for every destination element.
  const std::size_t total = x.value().size();
  std::vector<std::size_t> index(total);
  std::vector<std::size_t> counter(rank, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < rank; ++i) off += counter[i] * src_strides[i];
    index[flat] = off;
    for (std::size_t i = rank; i-- > 0;) {
      if (++counter[i] < out_shape[i]) break;
      counter[i] = 0;
    }
  }
  Tensor out(out_shape);
  const double* xv = x.value().raw();
  for (std::size_t i = 0; i < total; ++i) out[i] = xv[index[i]];
  return make_result(std::move(out), {x.node()}, [index = std::move(index)](Node& self) {
    double* gx = self.parents[0]->grad_buffer().raw();
    const double* g = self.grad.raw();
    for (std::size_t i = 0; i < index.size(); ++i) gx[index[i]] += g[i];
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return make_result(Tensor::scalar(total), {x.node()}, [](Node& self) {
    const double g = self.grad[0];
    auto& px = *self.parents[0];
    double* gx = px.grad_buffer().raw();
    for (std::size_t i = 0; i < px.value.size(); ++i) gx[i] += g;
  });
}

Var cross_entropy(const Var& logits, std::span<const std::size_t> targets,
                  std::size_t ignore_index) {
  require_rank(logits.value(), 2, "cross_entropy");
  const std::size_t rows = logits.shape()[0], vocab = logits.shape()[1];
  if (targets.size() != rows) {
    fail(ErrorKind::kDimension, "cross_entropy: " + std::to_string(targets.size()) +
                                    " targets for " + std::to_string(rows) + " rows");
  }
  Tensor probs(logits.shape());
  const double* lv = logits.value().raw();
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (targets[r] == ignore_index) continue;
    if (targets[r] >= vocab) {
      fail(ErrorKind::kIndex, "cross_entropy: target " + std::to_string(targets[r]) +
                                  " outside vocabulary of " + std::to_string(vocab));
    }
    const double* row = lv + r * vocab;
    double mx = *std::max_element(row, row + vocab);
    double z = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    total += lse - row[targets[r]];
    for (std::size_t j = 0; j < vocab; ++j) probs[r * vocab + j] = std::exp(row[j] - lse);
    ++counted;
  }
  const double denom = counted ? static_cast<double>(counted) : 1.0;
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  return make_result(
      Tensor::scalar(total / denom), {logits.node()},
      [probs = std::move(probs), tgt = std::move(tgt), vocab, denom,
       ignore_index](Node& self) {
        const double g = self.grad[0] / denom;
        double* gl = self.parents[0]->grad_buffer().raw();
        for (std::size_t r = 0; r < tgt.size(); ++r) {
          if (tgt[r] == ignore_index) continue;
          for (std::size_t j = 0; j < vocab; ++j) gl[r * vocab + j] += g * probs[r * vocab + j];
          gl[r * vocab + tgt[r]] -= g;
        }
      });
}

Var apply_mask(const Var& x, const Tensor& mask) {
  if (mask.shape() != x.shape()) fail(ErrorKind::kDimension, "apply_mask: shape mismatch");
  return mul(x, Var(mask));
}

}  // namespace ops
}  // namespace langclust
