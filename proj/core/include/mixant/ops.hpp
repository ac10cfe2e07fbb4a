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

#include "mixant/autograd.hpp"
#include "mixant/tensor.hpp"

namespace mixant {

// Value-level primitives. Each operates over the last axis and treats all
// leading axes as a flattened batch of rows unless noted.

/// x[..., Din] * W[Din, Dout] (+ b[Dout]).
Tensor linear(const Tensor& x, const Tensor& W);
Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b);

/// Stabilized by max-subtraction; each row sums to one.
Tensor softmax(const Tensor& x);

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);

/// Depthwise causal convolution over time. kernel[w, d] weighs lag w:
/// y[t, d] = sum_w kernel[w, d] * x[t - w, d], with x[s] = 0 for s < 0.
Tensor conv1d_causal(const Tensor& x, const Tensor& kernel);

double silu(double x) noexcept;
double gelu(double x) noexcept;
double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

/// Differentiable counterparts recorded on a Graph.
namespace ops {

Var linear(Var x, Var W);
Var linear(Var x, Var W, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
/// x[..., D] + v[D] broadcast over rows.
Var add_row(Var x, Var v);
Var sum(Var x);

Var silu(Var x);
Var gelu(Var x);
Var softplus(Var x);
/// -exp(x); maps an unconstrained log-parameter to a strictly negative value.
Var neg_exp(Var x);

Var softmax(Var x);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
Var conv1d_causal(Var x, Var kernel);

/// Reverses the leading (time) axis of a [T, D] tensor.
Var flip_rows(Var x);
Var concat_cols(Var a, Var b);
Var slice_rows(Var x, std::size_t begin, std::size_t end);
/// [T, D] -> [D], mean over time.
Var mean_rows(Var x);

/// Mean of squared differences over every element.
Var mse(Var a, Var b);
/// KL(C / sum(C) || Uniform(E)) for a usage vector C[E] with positive sum,
/// using 0 * log 0 = 0.
Var kl_to_uniform(Var usage);

/// bank[E, ...] -> bank[index, ...]; gradient reaches only the selected slot.
Var take(Var bank, std::size_t index);
/// Returns x unchanged in value, but routes d/d(gamma[index]) = sum(grad * x).
/// Equivalent to x * (1 + gamma[index] - stop_gradient(gamma[index])).
Var straight_through(Var x, Var gamma, std::size_t index);

}  // namespace ops
}  // namespace mixant
