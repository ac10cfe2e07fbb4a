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

#pragma once

#include <cstddef>
#include <string>

#include "mixant/autograd.hpp"
#include "mixant/rng.hpp"
#include "mixant/tensor.hpp"

namespace mixant {

/// How the input matrix is discretized. `zoh` is the exact zero-order hold
/// B_bar = (dA)^-1 (exp(dA) - 1) d B; `euler` is the first-order B_bar = d B.
enum class InputDiscretization { zoh, euler };

/// Per-step discretized transition (decay) and input matrices, both [T, D, N].
struct Discretized {
  Tensor decay;
  Tensor input;
};

/// Discretizes diagonal A[D, N] with per-step, per-channel time steps
/// delta[T, D] and input matrix B[T, N]. Throws std::domain_error if any
/// delta is not strictly positive.
Discretized discretize(const Tensor& A, const Tensor& B, const Tensor& delta,
                       InputDiscretization mode = InputDiscretization::zoh);

/// Latent states of a scan, h[t, d, n] after consuming x[t].
struct ScanState {
  Tensor h;
};

/// h_t = decay_t * h_{t-1} + input_t * x_t (x broadcast over the state axis),
/// y[t, d] = sum_n C[t, n] h_t[d, n], with h_{-1} = 0.
Tensor selective_scan(const Tensor& x, const Tensor& decay, const Tensor& input,
                      const Tensor& C, ScanState* states = nullptr);

/// (exp(z) - 1) / z, continuous at 0.
double zoh_factor(double z) noexcept;
/// d/dz of zoh_factor.
double zoh_factor_derivative(double z) noexcept;

namespace ops {

/// exp(delta[t, d] * A[d, n]) -> [T, D, N].
Var zoh_decay(Var A, Var delta);
/// Discretized input matrix -> [T, D, N].
Var zoh_input(Var A, Var B, Var delta, InputDiscretization mode);
/// Same, reading exp(delta * A) from `decay` (the zoh_decay of A and delta)
/// instead of recomputing it. No gradient flows into `decay`.
Var zoh_input(Var A, Var B, Var delta, Var decay, InputDiscretization mode);
Var selective_scan(Var x, Var decay, Var input, Var C);

}  // namespace ops

struct SsmDims {
  std::size_t channels = 0;  // D
  std::size_t state = 0;     // N
  std::size_t conv_width = 4;
  std::size_t delta_rank() const noexcept { return channels <= 16 ? 1 : (channels + 15) / 16; }
};

/// Parameters of one directional selective-scan unit. `A_log` is null when
/// the unit's transition matrix comes from an expert bank instead.
struct SsmUnit {
  SsmDims dims;
  Parameter* A_log = nullptr;  // [D, N], A = -exp(A_log)
  Parameter* W_B = nullptr;    // [D, N]
  Parameter* W_C = nullptr;    // [D, N]
  Parameter* W_delta_down = nullptr;  // [D, r]
  Parameter* W_delta_up = nullptr;    // [r, D]
  Parameter* delta_bias = nullptr;    // [D]
  Parameter* conv_kernel = nullptr;   // [W, D]
};

/// A_log[d, n] = log(n + 1): the S4D-real initialization, identical for every
/// channel and independent of any RNG.
Tensor s4d_real_log_init(std::size_t channels, std::size_t state);

/// Registers a unit's parameters under `prefix` and draws them from `rng`.
SsmUnit make_ssm_unit(ParameterStore& store, const std::string& prefix, SsmDims dims,
                      Rng& rng, bool with_A = true);

/// -exp(A_log) of the unit's own transition matrix.
Var static_transition(Graph& g, const SsmUnit& unit);

/// Input-dependent selective scan over x[T, D] with transition A[D, N]:
/// B(x) = x W_B, C(x) = x W_C, delta(x) = softplus(x W_down W_up + bias).
/// `x` is expected to be convolved and activated already.
Var s6_forward(Var x, const SsmUnit& unit, Var A,
               InputDiscretization mode = InputDiscretization::zoh);

}  // namespace mixant
