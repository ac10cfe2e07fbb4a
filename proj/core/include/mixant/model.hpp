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
#include <memory>
#include <vector>

#include "mixant/autograd.hpp"
#include "mixant/config.hpp"
#include "mixant/router.hpp"
#include "mixant/ssm.hpp"
#include "mixant/tensor.hpp"

namespace mixant {

/// Bidirectional selective-scan layer. A static layer gives each direction
/// its own fixed A; a mixture layer routes A from per-direction expert banks.
struct MixMambaLayer {
  std::size_t d_model = 0;
  std::size_t d_inner = 0;
  Parameter* in_W = nullptr;    // [d_model, d_inner]
  Parameter* in_b = nullptr;
  Parameter* gate_W = nullptr;  // [d_model, d_inner], residual gate R
  Parameter* gate_b = nullptr;
  Parameter* out_W = nullptr;   // [d_inner, d_model]
  Parameter* out_b = nullptr;
  SsmUnit fwd;
  SsmUnit bwd;
  bool mixture = false;
  ExpertBank fwd_bank;
  ExpertBank bwd_bank;
  Router router;
};

struct LayerOptions {
  InputDiscretization discretization = InputDiscretization::zoh;
  bool gate_on_observed_only = true;
  bool straight_through = false;
};

/// F[T, d_model] -> [T, d_model]. The gate of a mixture layer sees rows
/// [0, observed_len) of F only (all rows if gate_on_observed_only is off).
/// The routing decision, if any, is written to `route`.
Var mixmamba_layer_forward(Var F, std::size_t observed_len, const MixMambaLayer& layer,
                           const LayerOptions& options,
                           RouteDecision* route = nullptr);

/// Sinusoidal embedding of a diffusion step, [dim].
Tensor step_embedding(std::size_t step, std::size_t dim);

struct Block {
  Parameter* ln_gain = nullptr;
  Parameter* ln_bias = nullptr;
  MixMambaLayer layer;
  Parameter* mlp_W1 = nullptr;
  Parameter* mlp_b1 = nullptr;
  Parameter* mlp_W2 = nullptr;
  Parameter* mlp_b2 = nullptr;
};

/// Denoiser: (noisy labels, conditioning, step) -> predicted clean labels.
///
/// Input embedding of [Y_t | X], plus a projected step embedding, then K
/// residual blocks F_k = MLP(Layer(LN(F_{k-1}))) + F_{k-1}, where blocks
/// 1..K0 are static and the rest are mixture blocks, then a linear head.
class MixAntModel {
 public:
  explicit MixAntModel(const ModelConfig& config);

  MixAntModel(const MixAntModel&) = delete;
  MixAntModel& operator=(const MixAntModel&) = delete;
  MixAntModel(MixAntModel&&) = default;
  MixAntModel& operator=(MixAntModel&&) = default;

  struct Output {
    Var scores;                        // [T, num_classes]
    std::vector<RouteDecision> routes;  // one per mixture block
  };

  /// `noisy` is [T, n_c], `conditioning` is [T, n_d], the first
  /// `observed_len` rows being observed frames.
  Output forward(Graph& g, const Tensor& noisy, const Tensor& conditioning,
                 std::size_t observed_len, std::size_t step) const;

  struct Prediction {
    Tensor scores;
    std::vector<std::size_t> selections;  // forward-unit expert per mixture block
  };
  /// Gradient-free forward.
  Prediction predict(const Tensor& noisy, const Tensor& conditioning, std::size_t observed_len,
                     std::size_t step) const;

  const ModelConfig& config() const noexcept { return config_; }
  ParameterStore& parameters() noexcept { return *store_; }
  const ParameterStore& parameters() const noexcept { return *store_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  std::vector<Block>& blocks() noexcept { return blocks_; }

 private:
  ModelConfig config_;
  std::unique_ptr<ParameterStore> store_;
  Parameter* embed_W_ = nullptr;
  Parameter* embed_b_ = nullptr;
  Parameter* time_W_ = nullptr;
  Parameter* time_b_ = nullptr;
  std::vector<Block> blocks_;
  Parameter* head_W_ = nullptr;
  Parameter* head_b_ = nullptr;
};

}  // namespace mixant
