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
#include <span>
#include <string>
#include <vector>

#include "mixant/autograd.hpp"
#include "mixant/rng.hpp"
#include "mixant/tensor.hpp"

namespace mixant {

// Mixture-of-experts routing of the SSM transition matrix.
//
// Each directional unit of a mixture layer owns E candidate A matrices. A
// softmax gate over the time-mean of the observed block input picks one of
// them by argmax. The index carries no gradient: a selected expert learns
// through the scan, and the gate learns only through the load-balancing loss
// on its soft outputs (optionally also through a straight-through estimator).

enum class RouterMode { unified, independent };

RouterMode parse_router_mode(const std::string& s);
std::string to_string(RouterMode mode);

/// E expert log-transition matrices, A_e = -exp(A_log_bank[e]) < 0.
struct ExpertBank {
  Parameter* A_log_bank = nullptr;  // [E, D, N]
  std::size_t experts() const { return A_log_bank->value.dim(0); }
};

/// Expert 0 starts at the S4D-real values, so a one-expert bank matches a
/// static unit exactly. Experts 1..E-1 add N(0, jitter^2) drawn from `rng`.
ExpertBank make_expert_bank(ParameterStore& store, const std::string& name,
                            std::size_t experts, std::size_t channels, std::size_t state,
                            Rng& rng, double jitter = 0.5);

/// -exp(A_log_bank[e]) as a [D, N] graph value.
Var expert_transition(Graph& g, const ExpertBank& bank, std::size_t e);

/// softmax(mean_t(x_obs) * W_g); x_obs is [P, D] with P >= 1, W_g is [D, E].
Tensor compute_gating(const Tensor& x_obs, const Tensor& W_g);
Var compute_gating(Var x_obs, Var W_g);

/// argmax with ties resolved to the lowest index.
std::size_t select_expert(std::span<const double> gamma);

struct Router {
  RouterMode mode = RouterMode::unified;
  Parameter* W_g_fwd = nullptr;  // [D, E]; the only gate in unified mode
  Parameter* W_g_bwd = nullptr;  // [D, E]; independent mode only
};

Router make_router(ParameterStore& store, const std::string& prefix, RouterMode mode,
                   std::size_t channels, std::size_t experts, Rng& rng);

struct RouteDecision {
  Var A_fwd;
  Var A_bwd;
  Var gamma_fwd;
  Var gamma_bwd;  // same node as gamma_fwd in unified mode
  std::size_t index_fwd = 0;
  std::size_t index_bwd = 0;
};

/// Gates on `x_obs` and picks one expert per directional bank. Both
/// directions gate on the same un-flipped observation.
RouteDecision route(Var x_obs, const ExpertBank& fwd_bank, const ExpertBank& bwd_bank,
                    const Router& router);

/// Soft usage C[e] = sum_b gamma[b, e] over a [B, E] batch of gates.
Tensor accumulate_usage(const Tensor& gammas);
Var accumulate_usage(std::span<const Var> gammas);

/// sum over layers of KL(C^k / sum C^k || Uniform(E)).
double load_balance_loss(std::span<const Tensor> usage_per_layer);
Var load_balance_loss(std::span<const Var> usage_per_layer);

/// Binary [K_E, E] record of the expert chosen at each mixture block.
class SelectionMatrix {
 public:
  SelectionMatrix(std::size_t blocks, std::size_t experts);

  std::size_t blocks() const noexcept { return blocks_; }
  std::size_t experts() const noexcept { return experts_; }
  const Tensor& matrix() const noexcept { return matrix_; }
  /// Row-major flattening, length K_E * E.
  std::vector<int> flatten() const;

 private:
  friend SelectionMatrix record_selection(std::span<const std::size_t>, std::size_t);
  std::size_t blocks_;
  std::size_t experts_;
  Tensor matrix_;
};

/// Throws std::out_of_range if an index is >= experts.
SelectionMatrix record_selection(std::span<const std::size_t> indices, std::size_t experts);

}  // namespace mixant
