/*
 * Copyright 2026 The MixANT Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mixant/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mixant {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

void require_rank(const Tensor& x, std::size_t rank, const char* op) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) +
                     ", got " + shape_string(x.shape()));
  }
}

Shape with_last(const Shape& s, std::size_t last) {
  Shape out = s.empty() ? Shape{1} : s;
  out.back() = last;
  return out;
}

void check_linear(const Tensor& x, const Tensor& W) {
  if (W.rank() != 2 || x.rank() == 0 || x.cols() != W.dim(0)) {
    throw ShapeError("linear: input " + shape_string(x.shape()) + " vs weight " +
                     shape_string(W.shape()));
  }
}

void matmul_into(const Tensor& x, const Tensor& W, Tensor& out) {
  const std::size_t rows = x.rows(), din = W.dim(0), dout = W.dim(1);
  const double* xp = x.data().data();
  const double* wp = W.data().data();
  double* op = out.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    double* orow = op + r * dout;
    const double* xrow = xp + r * din;
    for (std::size_t i = 0; i < din; ++i) {
      const double xv = xrow[i];
      const double* wrow = wp + i * dout;
      for (std::size_t o = 0; o < dout; ++o) orow[o] += xv * wrow[o];
    }
  }
}

// Adds the linear VJP into the buffers that are non-null.
void linear_backward(const Tensor& x, const Tensor& W, const Tensor& g, Tensor* gx,
                     Tensor* gW, Tensor* gb) {
  const std::size_t rows = x.rows(), din = W.dim(0), dout = W.dim(1);
  const double* xp = x.data().data();
  const double* wp = W.data().data();
  const double* gp = g.data().data();
  if (gx) {
    double* gxp = gx->data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* grow = gp + r * dout;
      for (std::size_t i = 0; i < din; ++i) {
        const double* wrow = wp + i * dout;
        double acc = 0.0;
        for (std::size_t o = 0; o < dout; ++o) acc += grow[o] * wrow[o];
        gxp[r * din + i] += acc;
      }
    }
  }
  if (gW) {
    double* gwp = gW->data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* grow = gp + r * dout;
      for (std::size_t i = 0; i < din; ++i) {
        const double xv = xp[r * din + i];
        double* gwrow = gwp + i * dout;
        for (std::size_t o = 0; o < dout; ++o) gwrow[o] += xv * grow[o];
      }
    }
  }
  if (gb) {
    double* gbp = gb->data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t o = 0; o < dout; ++o) gbp[o] += gp[r * dout + o];
    }
  }
}

template <class F, class DF>
Var unary(Var x, F f, DF df, const char* name) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return x.graph().record(
      std::move(out), {x},
      [x, df](const Tensor&, const Tensor& g) {
        const Tensor& in = x.value();
        Tensor& gx = x.graph().grad_buffer(x);
        for (std::size_t i = 0; i < in.size(); ++i) gx[i] += g[i] * df(in[i]);
      },
      name);
}

Graph* graph_of(Var a, Var b) {
  if (&a.graph() != &b.graph()) throw std::invalid_argument("operands on different graphs");
  return &a.graph();
}

}  // namespace

double sigmoid(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double silu(double x) noexcept { return x * sigmoid(x); }

double gelu(double x) noexcept {
  return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
}

double softplus(double x) noexcept {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

Tensor linear(const Tensor& x, const Tensor& W) {
  check_linear(x, W);
  Tensor out(with_last(x.shape(), W.dim(1)));
  matmul_into(x, W, out);
  return out;
}

Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b) {
  check_linear(x, W);
  if (b.size() != W.dim(1)) {
    throw ShapeError("linear: bias " + shape_string(b.shape()) + " vs weight " +
                     shape_string(W.shape()));
  }
  Tensor out(with_last(x.shape(), W.dim(1)));
  const std::size_t dout = W.dim(1);
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t o = 0; o < dout; ++o) out[r * dout + o] = b[o];
  }
  matmul_into(x, W, out);
  return out;
}

Tensor softmax(const Tensor& x) {
  if (x.cols() == 0) throw ShapeError("softmax: empty last axis");
  Tensor out(x.shape());
  const std::size_t c = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* in = x.data().data() + r * c;
    double* o = out.data().data() + r * c;
    const double m = *std::max_element(in, in + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += (o[j] = std::exp(in[j] - m));
    for (std::size_t j = 0; j < c; ++j) o[j] /= s;
  }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t c = x.cols();
  if (c == 0 || gain.size() != c || bias.size() != c) {
    throw ShapeError("layer_norm: input " + shape_string(x.shape()) + " vs gain " +
                     shape_string(gain.shape()));
  }
  Tensor out(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double* in = x.data().data() + r * c;
    double* o = out.data().data() + r * c;
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += in[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (in[j] - mean) * (in[j] - mean);
    var /= static_cast<double>(c);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < c; ++j) o[j] = (in[j] - mean) * inv * gain[j] + bias[j];
  }
  return out;
}

Tensor conv1d_causal(const Tensor& x, const Tensor& kernel) {
  require_rank(x, 2, "conv1d_causal");
  require_rank(kernel, 2, "conv1d_causal kernel");
  const std::size_t T = x.dim(0), D = x.dim(1), W = kernel.dim(0);
  if (W == 0 || kernel.dim(1) != D) {
    throw ShapeError("conv1d_causal: kernel " + shape_string(kernel.shape()) +
                     " vs input " + shape_string(x.shape()));
  }
  Tensor out(x.shape());
  for (std::size_t t = 0; t < T; ++t) {
    double* o = out.data().data() + t * D;
    for (std::size_t w = 0; w < W && w <= t; ++w) {
      const double* in = x.data().data() + (t - w) * D;
      const double* k = kernel.data().data() + w * D;
      for (std::size_t d = 0; d < D; ++d) o[d] += k[d] * in[d];
    }
  }
  return out;
}

namespace ops {

Var linear(Var x, Var W) {
  Tensor out = mixant::linear(x.value(), W.value());
  Graph& g = *graph_of(x, W);
  return g.record(
      std::move(out), {x, W},
      [x, W](const Tensor&, const Tensor& gout) {
        Graph& g = x.graph();
        linear_backward(x.value(), W.value(), gout,
                        g.requires_grad(x) ? &g.grad_buffer(x) : nullptr,
                        g.requires_grad(W) ? &g.grad_buffer(W) : nullptr, nullptr);
      },
      "linear");
}

Var linear(Var x, Var W, Var b) {
  Tensor out = mixant::linear(x.value(), W.value(), b.value());
  Graph& g = *graph_of(x, W);
  return g.record(
      std::move(out), {x, W, b},
      [x, W, b](const Tensor&, const Tensor& gout) {
        Graph& g = x.graph();
        linear_backward(x.value(), W.value(), gout,
                        g.requires_grad(x) ? &g.grad_buffer(x) : nullptr,
                        g.requires_grad(W) ? &g.grad_buffer(W) : nullptr,
                        g.requires_grad(b) ? &g.grad_buffer(b) : nullptr);
      },
      "linear");
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return graph_of(a, b)->record(
      std::move(out), {a, b},
      [a, b](const Tensor&, const Tensor& g) {
        Graph& gr = a.graph();
        for (Var v : {a, b}) {
          if (!gr.requires_grad(v)) continue;
          Tensor& gv = gr.grad_buffer(v);
          for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
        }
      },
      "add");
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return graph_of(a, b)->record(
      std::move(out), {a, b},
      [a, b](const Tensor&, const Tensor& g) {
        Graph& gr = a.graph();
        if (gr.requires_grad(a)) {
          Tensor& ga = gr.grad_buffer(a);
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (gr.requires_grad(b)) {
          Tensor& gb = gr.grad_buffer(b);
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
      },
      "sub");
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return graph_of(a, b)->record(
      std::move(out), {a, b},
      [a, b](const Tensor&, const Tensor& g) {
        Graph& gr = a.graph();
        if (gr.requires_grad(a)) {
          Tensor& ga = gr.grad_buffer(a);
          const Tensor& bv = b.value();
          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (gr.requires_grad(b)) {
          Tensor& gb = gr.grad_buffer(b);
          const Tensor& av = a.value();
          for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
      },
      "mul");
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (auto& v : out.data()) v *= factor;
  return a.graph().record(
      std::move(out), {a},
      [a, factor](const Tensor&, const Tensor& g) {
        Tensor& ga = a.graph().grad_buffer(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
      },
      "scale");
}

Var add_row(Var x, Var v) {
  const std::size_t c = x.value().cols();
  if (v.value().size() != c) {
    throw ShapeError("add_row: " + shape_string(x.shape()) + " + " +
                     shape_string(v.shape()));
  }
  Tensor out = x.value();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] += v.value()[j];
  }
  return graph_of(x, v)->record(
      std::move(out), {x, v},
      [x, v, c](const Tensor&, const Tensor& g) {
        Graph& gr = x.graph();
        if (gr.requires_grad(x)) {
          Tensor& gx = gr.grad_buffer(x);
          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (gr.requires_grad(v)) {
          Tensor& gv = gr.grad_buffer(v);
          for (std::size_t i = 0; i < g.size(); ++i) gv[i % c] += g[i];
        }
      },
      "add_row");
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.graph().record(
      Tensor::scalar(s), {x},
      [x](const Tensor&, const Tensor& g) {
        Tensor& gx = x.graph().grad_buffer(x);
        for (auto& v : gx.data()) v += g[0];
      },
      "sum");
}

Var silu(Var x) {
  return unary(
      x, [](double v) { return mixant::silu(v); },
      [](double v) {
        const double s = mixant::sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
      },
      "silu");
}

Var gelu(Var x) {
  return unary(
      x, [](double v) { return mixant::gelu(v); },
      [](double v) {
        const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
        const double pdf = std::exp(-0.5 * v * v) * std::numbers::inv_sqrtpi /
                           std::numbers::sqrt2;
        return cdf + v * pdf;
      },
      "gelu");
}

Var softplus(Var x) {
  return unary(
      x, [](double v) { return mixant::softplus(v); },
      [](double v) { return mixant::sigmoid(v); }, "softplus");
}

Var neg_exp(Var x) {
  return unary(
      x, [](double v) { return -std::exp(v); }, [](double v) { return -std::exp(v); },
      "neg_exp");
}

Var softmax(Var x) {
  Tensor out = mixant::softmax(x.value());
  return x.graph().record(
      std::move(out), {x},
      [x](const Tensor& y, const Tensor& g) {
        Tensor& gx = x.graph().grad_buffer(x);
        const std::size_t c = y.cols();
        for (std::size_t r = 0; r < y.rows(); ++r) {
          double dot = 0.0;
          for (std::size_t j = 0; j < c; ++j) dot += g[r * c + j] * y[r * c + j];
          for (std::size_t j = 0; j < c; ++j) {
            gx[r * c + j] += y[r * c + j] * (g[r * c + j] - dot);
          }
        }
      },
      "softmax");
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  Tensor out = mixant::layer_norm(x.value(), gain.value(), bias.value(), eps);
  return x.graph().record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, eps](const Tensor&, const Tensor& g) {
        Graph& gr = x.graph();
        const Tensor& in = x.value();
        const Tensor& gn = gain.value();
        const std::size_t c = in.cols();
        const bool need_x = gr.requires_grad(x);
        Tensor* gx = need_x ? &gr.grad_buffer(x) : nullptr;
        Tensor* gg = gr.requires_grad(gain) ? &gr.grad_buffer(gain) : nullptr;
        Tensor* gb = gr.requires_grad(bias) ? &gr.grad_buffer(bias) : nullptr;
        std::vector<double> xhat(c), dxhat(c);
        for (std::size_t r = 0; r < in.rows(); ++r) {
          const double* row = in.data().data() + r * c;
          const double* grow = g.data().data() + r * c;
          double mean = 0.0;
          for (std::size_t j = 0; j < c; ++j) mean += row[j];
          mean /= static_cast<double>(c);
          double var = 0.0;
          for (std::size_t j = 0; j < c; ++j) var += (row[j] - mean) * (row[j] - mean);
          var /= static_cast<double>(c);
          const double inv = 1.0 / std::sqrt(var + eps);
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            xhat[j] = (row[j] - mean) * inv;
            dxhat[j] = grow[j] * gn[j];
            m1 += dxhat[j];
            m2 += dxhat[j] * xhat[j];
            if (gg) (*gg)[j] += grow[j] * xhat[j];
            if (gb) (*gb)[j] += grow[j];
          }
          if (gx) {
            m1 /= static_cast<double>(c);
            m2 /= static_cast<double>(c);
            for (std::size_t j = 0; j < c; ++j) {
              (*gx)[r * c + j] += inv * (dxhat[j] - m1 - xhat[j] * m2);
            }
          }
        }
      },
      "layer_norm");
}

Var conv1d_causal(Var x, Var kernel) {
  Tensor out = mixant::conv1d_causal(x.value(), kernel.value());
  return graph_of(x, kernel)->record(
      std::move(out), {x, kernel},
      [x, kernel](const Tensor&, const Tensor& g) {
        Graph& gr = x.graph();
        const Tensor& in = x.value();
        const Tensor& k = kernel.value();
        const std::size_t T = in.dim(0), D = in.dim(1), W = k.dim(0);
        Tensor* gx = gr.requires_grad(x) ? &gr.grad_buffer(x) : nullptr;
        Tensor* gk = gr.requires_grad(kernel) ? &gr.grad_buffer(kernel) : nullptr;
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t w = 0; w < W && w <= t; ++w) {
            for (std::size_t d = 0; d < D; ++d) {
              const double gv = g[t * D + d];
              if (gx) (*gx)[(t - w) * D + d] += k[w * D + d] * gv;
              if (gk) (*gk)[w * D + d] += in[(t - w) * D + d] * gv;
            }
          }
        }
      },
      "conv1d_causal");
}

Var flip_rows(Var x) {
  const Tensor& in = x.value();
  require_rank(in, 2, "flip_rows");
  const std::size_t T = in.dim(0), D = in.dim(1);
  Tensor out(in.shape());
  for (std::size_t t = 0; t < T; ++t) {
    std::copy_n(in.data().data() + (T - 1 - t) * D, D, out.data().data() + t * D);
  }
  return x.graph().record(
      std::move(out), {x},
      [x, T, D](const Tensor&, const Tensor& g) {
        Tensor& gx = x.graph().grad_buffer(x);
        for (std::size_t t = 0; t < T; ++t) {
          for (std::size_t d = 0; d < D; ++d) gx[(T - 1 - t) * D + d] += g[t * D + d];
        }
      },
      "flip_rows");
}

Var concat_cols(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank(av, 2, "concat_cols");
  require_rank(bv, 2, "concat_cols");
  if (av.dim(0) != bv.dim(0)) {
    throw ShapeError("concat_cols: row mismatch " + shape_string(av.shape()) + " vs " +
                     shape_string(bv.shape()));
  }
  const std::size_t T = av.dim(0), da = av.dim(1), db = bv.dim(1);
  Tensor out(Shape{T, da + db});
  for (std::size_t t = 0; t < T; ++t) {
    std::copy_n(av.data().data() + t * da, da, out.data().data() + t * (da + db));
    std::copy_n(bv.data().data() + t * db, db, out.data().data() + t * (da + db) + da);
  }
  return graph_of(a, b)->record(
      std::move(out), {a, b},
      [a, b, T, da, db](const Tensor&, const Tensor& g) {
        Graph& gr = a.graph();
        if (gr.requires_grad(a)) {
          Tensor& ga = gr.grad_buffer(a);
          for (std::size_t t = 0; t < T; ++t)
            for (std::size_t j = 0; j < da; ++j) ga[t * da + j] += g[t * (da + db) + j];
        }
        if (gr.requires_grad(b)) {
          Tensor& gb = gr.grad_buffer(b);
          for (std::size_t t = 0; t < T; ++t)
            for (std::size_t j = 0; j < db; ++j)
              gb[t * db + j] += g[t * (da + db) + da + j];
        }
      },
      "concat_cols");
}

Var slice_rows(Var x, std::size_t begin, std::size_t end) {
  const Tensor& in = x.value();
  require_rank(in, 2, "slice_rows");
  if (begin > end || end > in.dim(0)) {
    throw ShapeError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") out of range for " + shape_string(in.shape()));
  }
  const std::size_t D = in.dim(1);
  Tensor out(Shape{end - begin, D});
  std::copy(in.data().begin() + static_cast<std::ptrdiff_t>(begin * D),
            in.data().begin() + static_cast<std::ptrdiff_t>(end * D), out.data().begin());
  return x.graph().record(
      std::move(out), {x},
      [x, begin, D](const Tensor&, const Tensor& g) {
        Tensor& gx = x.graph().grad_buffer(x);
        for (std::size_t i = 0; i < g.size(); ++i) gx[begin * D + i] += g[i];
      },
      "slice_rows");
}

Var mean_rows(Var x) {
  const Tensor& in = x.value();
  require_rank(in, 2, "mean_rows");
  const std::size_t T = in.dim(0), D = in.dim(1);
  if (T == 0) throw ShapeError("mean_rows: no rows");
  Tensor out(Shape{D});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t d = 0; d < D; ++d) out[d] += in[t * D + d];
  for (auto& v : out.data()) v /= static_cast<double>(T);
  return x.graph().record(
      std::move(out), {x},
      [x, T, D](const Tensor&, const Tensor& g) {
        Tensor& gx = x.graph().grad_buffer(x);
        const double inv = 1.0 / static_cast<double>(T);
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t d = 0; d < D; ++d) gx[t * D + d] += g[d] * inv;
      },
      "mean_rows");
}

Var mse(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mse");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const double n = static_cast<double>(av.size());
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += (av[i] - bv[i]) * (av[i] - bv[i]);
  return graph_of(a, b)->record(
      Tensor::scalar(s / n), {a, b},
      [a, b, n](const Tensor&, const Tensor& g) {
        Graph& gr = a.graph();
        const Tensor& av = a.value();
        const Tensor& bv = b.value();
        const double k = 2.0 * g[0] / n;
        if (gr.requires_grad(a)) {
          Tensor& ga = gr.grad_buffer(a);
          for (std::size_t i = 0; i < av.size(); ++i) ga[i] += k * (av[i] - bv[i]);
        }
        if (gr.requires_grad(b)) {
          Tensor& gb = gr.grad_buffer(b);
          for (std::size_t i = 0; i < av.size(); ++i) gb[i] -= k * (av[i] - bv[i]);
        }
      },
      "mse");
}

Var kl_to_uniform(Var usage) {
  const Tensor& c = usage.value();
  const std::size_t E = c.size();
  double total = 0.0;
  for (double v : c.data()) total += v;
  if (E == 0 || !(total > 0.0)) throw std::invalid_argument("kl_to_uniform: usage sum must be positive");
  double kl = 0.0;
  for (double v : c.data()) {
    const double p = v / total;
    if (p > 0.0) kl += p * std::log(p * static_cast<double>(E));
  }
  return usage.graph().record(
      Tensor::scalar(kl), {usage},
      [usage, total, kl, E](const Tensor&, const Tensor& g) {
        const Tensor& c = usage.value();
        Tensor& gc = usage.graph().grad_buffer(usage);
        for (std::size_t e = 0; e < E; ++e) {
          const double p = std::max(c[e] / total, 1e-300);
          gc[e] += g[0] * (std::log(p * static_cast<double>(E)) - kl) / total;
        }
      },
      "kl_to_uniform");
}

Var take(Var bank, std::size_t index) {
  const Tensor& b = bank.value();
  if (b.rank() < 1 || index >= b.dim(0)) {
    throw ShapeError("take: index " + std::to_string(index) + " out of range for " +
                     shape_string(b.shape()));
  }
  Shape inner(b.shape().begin() + 1, b.shape().end());
  const std::size_t n = numel(inner);
  Tensor out(inner);
  std::copy_n(b.data().data() + index * n, n, out.data().data());
  return bank.graph().record(
      std::move(out), {bank},
      [bank, index, n](const Tensor&, const Tensor& g) {
        Tensor& gb = bank.graph().grad_buffer(bank);
        for (std::size_t i = 0; i < n; ++i) gb[index * n + i] += g[i];
      },
      "take");
}

Var straight_through(Var x, Var gamma, std::size_t index) {
  if (index >= gamma.value().size()) throw ShapeError("straight_through: index out of range");
  Tensor out = x.value();
  return graph_of(x, gamma)->record(
      std::move(out), {x, gamma},
      [x, gamma, index](const Tensor& y, const Tensor& g) {
        Graph& gr = x.graph();
        if (gr.requires_grad(x)) {
          Tensor& gx = gr.grad_buffer(x);
          for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        }
        if (gr.requires_grad(gamma)) {
          double dot = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
          gr.grad_buffer(gamma)[index] += dot;
        }
      },
      "straight_through");
}

}  // namespace ops
}  // namespace mixant
