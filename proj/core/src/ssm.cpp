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

#include "mixant/ssm.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "mixant/ops.hpp"

namespace mixant {
namespace {

constexpr double kSeriesThreshold = 1e-8;
// Above this |z|, exp(z) - 1 keeps ~1e-14 relative accuracy and one exp
// serves both the factor and its derivative.
constexpr double kCancellationThreshold = 1e-2;

struct ZohTerms {
  double phi;
  double dphi;
};

// `e` is exp(z) when the caller already has it, NaN otherwise.
inline ZohTerms zoh_terms(double z, double e) noexcept {
  if (std::abs(z) < kCancellationThreshold) return {zoh_factor(z), zoh_factor_derivative(z)};
  if (std::isnan(e)) e = std::exp(z);
  const double em1 = e - 1.0;
  return {em1 / z, (z * e - em1) / (z * z)};
}

inline double zoh_phi(double z, double e) noexcept {
  if (std::abs(z) < kCancellationThreshold) return zoh_factor(z);
  if (std::isnan(e)) e = std::exp(z);
  return (e - 1.0) / z;
}

constexpr double kNoExp = std::numeric_limits<double>::quiet_NaN();

struct ScanDims {
  std::size_t T, D, N;
};

ScanDims check_discretize(const Tensor& A, const Tensor& B, const Tensor& delta) {
  if (A.rank() != 2 || B.rank() != 2 || delta.rank() != 2 || B.dim(0) != delta.dim(0) ||
      A.dim(0) != delta.dim(1) || A.dim(1) != B.dim(1)) {
    throw ShapeError("discretize: A " + shape_string(A.shape()) + ", B " +
                     shape_string(B.shape()) + ", delta " + shape_string(delta.shape()));
  }
  for (double d : delta.data()) {
    if (!(d > 0.0)) throw std::domain_error("discretize: time step must be positive");
  }
  return {delta.dim(0), A.dim(0), A.dim(1)};
}

ScanDims check_scan(const Tensor& x, const Tensor& decay, const Tensor& input,
                    const Tensor& C) {
  if (x.rank() != 2 || decay.rank() != 3 || C.rank() != 2 || decay.shape() != input.shape() ||
      decay.dim(0) != x.dim(0) || decay.dim(1) != x.dim(1) || C.dim(0) != x.dim(0) ||
      C.dim(1) != decay.dim(2)) {
    throw ShapeError("selective_scan: x " + shape_string(x.shape()) + ", decay " +
                     shape_string(decay.shape()) + ", input " + shape_string(input.shape()) +
                     ", C " + shape_string(C.shape()));
  }
  return {x.dim(0), x.dim(1), decay.dim(2)};
}

Tensor decay_forward(const Tensor& A, const Tensor& delta, ScanDims s) {
  Tensor out(Shape{s.T, s.D, s.N});
  double* o = out.data().data();
  for (std::size_t t = 0; t < s.T; ++t)
    for (std::size_t d = 0; d < s.D; ++d) {
      const double dt = delta[t * s.D + d];
      for (std::size_t n = 0; n < s.N; ++n) *o++ = std::exp(dt * A[d * s.N + n]);
    }
  return out;
}

// `decay`, when given, holds exp(delta * A) and saves recomputing it.
Tensor input_forward(const Tensor& A, const Tensor& B, const Tensor& delta, ScanDims s,
                     InputDiscretization mode, const Tensor* decay = nullptr) {
  Tensor out(Shape{s.T, s.D, s.N});
  double* o = out.data().data();
  for (std::size_t t = 0; t < s.T; ++t)
    for (std::size_t d = 0; d < s.D; ++d) {
      const double dt = delta[t * s.D + d];
      for (std::size_t n = 0; n < s.N; ++n) {
        const std::size_t i = (t * s.D + d) * s.N + n;
        const double phi = mode == InputDiscretization::zoh
                               ? zoh_phi(dt * A[d * s.N + n], decay ? (*decay)[i] : kNoExp)
                               : 1.0;
        *o++ = phi * dt * B[t * s.N + n];
      }
    }
  return out;
}

}  // namespace

double zoh_factor(double z) noexcept {
  if (std::abs(z) < kSeriesThreshold) return 1.0;
  return std::expm1(z) / z;
}

double zoh_factor_derivative(double z) noexcept {
  if (std::abs(z) < 1e-3) return 0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0;
  return (z * std::exp(z) - std::expm1(z)) / (z * z);
}

Discretized discretize(const Tensor& A, const Tensor& B, const Tensor& delta,
                       InputDiscretization mode) {
  const ScanDims s = check_discretize(A, B, delta);
  return {decay_forward(A, delta, s), input_forward(A, B, delta, s, mode)};
}

Tensor selective_scan(const Tensor& x, const Tensor& decay, const Tensor& input,
                      const Tensor& C, ScanState* states) {
  const auto [T, D, N] = check_scan(x, decay, input, C);
  Tensor y(Shape{T, D});
  Tensor h(Shape{D, N});
  if (states) states->h = Tensor(Shape{T, D, N});
  for (std::size_t t = 0; t < T; ++t) {
    const double* a = decay.data().data() + t * D * N;
    const double* b = input.data().data() + t * D * N;
    const double* c = C.data().data() + t * N;
    for (std::size_t d = 0; d < D; ++d) {
      const double xv = x[t * D + d];
      double* hd = h.data().data() + d * N;
      double acc = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        hd[n] = a[d * N + n] * hd[n] + b[d * N + n] * xv;
        acc += c[n] * hd[n];
      }
      y[t * D + d] = acc;
    }
    if (states) {
      std::copy(h.data().begin(), h.data().end(),
                states->h.data().begin() + static_cast<std::ptrdiff_t>(t * D * N));
    }
  }
  return y;
}

namespace ops {

Var zoh_decay(Var A, Var delta) {
  const Tensor& av = A.value();
  const Tensor& dv = delta.value();
  if (av.rank() != 2 || dv.rank() != 2 || av.dim(0) != dv.dim(1)) {
    throw ShapeError("zoh_decay: A " + shape_string(av.shape()) + ", delta " +
                     shape_string(dv.shape()));
  }
  for (double d : dv.data()) {
    if (!(d > 0.0)) throw std::domain_error("discretize: time step must be positive");
  }
  const ScanDims s{dv.dim(0), av.dim(0), av.dim(1)};
  return A.graph().record(
      decay_forward(av, dv, s), {A, delta},
      [A, delta, s](const Tensor& out, const Tensor& g) {
        Graph& gr = A.graph();
        const Tensor& av = A.value();
        const Tensor& dv = delta.value();
        Tensor* gA = gr.requires_grad(A) ? &gr.grad_buffer(A) : nullptr;
        Tensor* gd = gr.requires_grad(delta) ? &gr.grad_buffer(delta) : nullptr;
        for (std::size_t t = 0; t < s.T; ++t)
          for (std::size_t d = 0; d < s.D; ++d) {
            const double dt = dv[t * s.D + d];
            double acc = 0.0;
            for (std::size_t n = 0; n < s.N; ++n) {
              const std::size_t i = (t * s.D + d) * s.N + n;
              const double go = g[i] * out[i];
              if (gA) (*gA)[d * s.N + n] += go * dt;
              acc += go * av[d * s.N + n];
            }
            if (gd) (*gd)[t * s.D + d] += acc;
          }
      },
      "zoh_decay");
}

Var zoh_input(Var A, Var B, Var delta, InputDiscretization mode) {
  return zoh_input(A, B, delta, Var{}, mode);
}

Var zoh_input(Var A, Var B, Var delta, Var decay, InputDiscretization mode) {
  const ScanDims s = check_discretize(A.value(), B.value(), delta.value());
  const Tensor* cached = decay.valid() ? &decay.value() : nullptr;
  if (cached && cached->shape() != Shape{s.T, s.D, s.N}) {
    throw ShapeError("zoh_input: decay " + shape_string(cached->shape()));
  }
  return A.graph().record(
      input_forward(A.value(), B.value(), delta.value(), s, mode, cached), {A, B, delta},
      [A, B, delta, decay, s, mode](const Tensor&, const Tensor& g) {
        const Tensor* cached = decay.valid() ? &decay.value() : nullptr;
        Graph& gr = A.graph();
        const Tensor& av = A.value();
        const Tensor& bv = B.value();
        const Tensor& dv = delta.value();
        Tensor* gA = gr.requires_grad(A) ? &gr.grad_buffer(A) : nullptr;
        Tensor* gB = gr.requires_grad(B) ? &gr.grad_buffer(B) : nullptr;
        Tensor* gd = gr.requires_grad(delta) ? &gr.grad_buffer(delta) : nullptr;
        const bool zoh = mode == InputDiscretization::zoh;
        for (std::size_t t = 0; t < s.T; ++t)
          for (std::size_t d = 0; d < s.D; ++d) {
            const double dt = dv[t * s.D + d];
            double acc_dt = 0.0;
            for (std::size_t n = 0; n < s.N; ++n) {
              const std::size_t i = (t * s.D + d) * s.N + n;
              const double gi = g[i];
              const double a = av[d * s.N + n];
              const double b = bv[t * s.N + n];
              const double z = dt * a;
              const ZohTerms zt = zoh ? zoh_terms(z, cached ? (*cached)[i] : kNoExp) : ZohTerms{1.0, 0.0};
              const double phi = zt.phi, dphi = zt.dphi;
              if (gB) (*gB)[t * s.N + n] += gi * phi * dt;
              if (gA) (*gA)[d * s.N + n] += gi * dphi * dt * dt * b;
              acc_dt += gi * (dphi * a * dt + phi) * b;
            }
            if (gd) (*gd)[t * s.D + d] += acc_dt;
          }
      },
      "zoh_input");
}

Var selective_scan(Var x, Var decay, Var input, Var C) {
  auto states = std::make_shared<ScanState>();
  Tensor y = mixant::selective_scan(x.value(), decay.value(), input.value(), C.value(),
                                    states.get());
  const auto [T, D, N] = check_scan(x.value(), decay.value(), input.value(), C.value());
  return x.graph().record(
      std::move(y), {x, decay, input, C},
      [x, decay, input, C, states, T = T, D = D, N = N](const Tensor&, const Tensor& gy) {
        Graph& gr = x.graph();
        const Tensor& xv = x.value();
        const Tensor& av = decay.value();
        const Tensor& bv = input.value();
        const Tensor& cv = C.value();
        const Tensor& h = states->h;
        Tensor* gx = gr.requires_grad(x) ? &gr.grad_buffer(x) : nullptr;
        Tensor* ga = gr.requires_grad(decay) ? &gr.grad_buffer(decay) : nullptr;
        Tensor* gb = gr.requires_grad(input) ? &gr.grad_buffer(input) : nullptr;
        Tensor* gc = gr.requires_grad(C) ? &gr.grad_buffer(C) : nullptr;
        std::vector<double> dh(D * N, 0.0);
        for (std::size_t t = T; t-- > 0;) {
          const double* ht = h.data().data() + t * D * N;
          const double* hprev = t > 0 ? h.data().data() + (t - 1) * D * N : nullptr;
          const double* at = av.data().data() + t * D * N;
          const double* bt = bv.data().data() + t * D * N;
          const double* ct = cv.data().data() + t * N;
          for (std::size_t d = 0; d < D; ++d) {
            const double g = gy[t * D + d];
            const double xd = xv[t * D + d];
            double acc_x = 0.0;
            for (std::size_t n = 0; n < N; ++n) {
              const std::size_t i = d * N + n;
              if (gc) (*gc)[t * N + n] += g * ht[i];
              const double dhi = dh[i] + g * ct[n];
              if (ga && hprev) (*ga)[t * D * N + i] += dhi * hprev[i];
              if (gb) (*gb)[t * D * N + i] += dhi * xd;
              acc_x += dhi * bt[i];
              dh[i] = dhi * at[i];
            }
            if (gx) (*gx)[t * D + d] += acc_x;
          }
        }
      },
      "selective_scan");
}

}  // namespace ops

Tensor s4d_real_log_init(std::size_t channels, std::size_t state) {
  Tensor t(Shape{channels, state});
  for (std::size_t d = 0; d < channels; ++d)
    for (std::size_t n = 0; n < state; ++n) t.at(d, n) = std::log(static_cast<double>(n + 1));
  return t;
}

SsmUnit make_ssm_unit(ParameterStore& store, const std::string& prefix, SsmDims dims,
                      Rng& rng, bool with_A) {
  const std::size_t D = dims.channels, N = dims.state, r = dims.delta_rank();
  SsmUnit u;
  u.dims = dims;
  if (with_A) u.A_log = &store.add(prefix + ".A_log", s4d_real_log_init(D, N));
  const double proj = 1.0 / std::sqrt(static_cast<double>(D));
  u.W_B = &store.add(prefix + ".W_B", rng.normal_tensor({D, N}, proj));
  u.W_C = &store.add(prefix + ".W_C", rng.normal_tensor({D, N}, proj));
  u.W_delta_down = &store.add(prefix + ".W_delta_down", rng.normal_tensor({D, r}, proj));
  u.W_delta_up = &store.add(prefix + ".W_delta_up",
                            rng.normal_tensor({r, D}, 0.1 / std::sqrt(static_cast<double>(r))));
  // Time steps start log-uniform in [1e-3, 1e-1]; the bias is softplus^-1 of that.
  Tensor bias(Shape{D});
  for (auto& b : bias.data()) {
    const double dt = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
    b = dt + std::log(-std::expm1(-dt));
  }
  u.delta_bias = &store.add(prefix + ".delta_bias", std::move(bias));
  const double k = 1.0 / std::sqrt(static_cast<double>(dims.conv_width));
  u.conv_kernel =
      &store.add(prefix + ".conv_kernel", rng.uniform_tensor({dims.conv_width, D}, -k, k));
  return u;
}

Var static_transition(Graph& g, const SsmUnit& unit) {
  if (!unit.A_log) throw std::logic_error("static_transition: unit has no own A matrix");
  return ops::neg_exp(g.param(*unit.A_log));
}

Var s6_forward(Var x, const SsmUnit& unit, Var A, InputDiscretization mode) {
  Graph& g = x.graph();
  Var B = ops::linear(x, g.param(*unit.W_B));
  Var C = ops::linear(x, g.param(*unit.W_C));
  Var low = ops::linear(x, g.param(*unit.W_delta_down));
  Var delta = ops::softplus(
      ops::linear(low, g.param(*unit.W_delta_up), g.param(*unit.delta_bias)));
  Var decay = ops::zoh_decay(A, delta);
  Var input = ops::zoh_input(A, B, delta, decay, mode);
  return ops::selective_scan(x, decay, input, C);
}

}  // namespace mixant
