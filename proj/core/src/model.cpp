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

#include "mixant/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mixant/ops.hpp"

namespace mixant {
namespace {

// Router gates and expert jitter draw from this stream. Every other initial
// value is independent of the number of experts.
constexpr std::uint64_t kRouterStream = 0x726f75746572ULL;

Parameter& dense_weight(ParameterStore& s, const std::string& name, std::size_t in,
                        std::size_t out, Rng& rng) {
  const double k = 1.0 / std::sqrt(static_cast<double>(in));
  return s.add(name, rng.uniform_tensor({in, out}, -k, k));
}

Parameter& zeros(ParameterStore& s, const std::string& name, std::size_t n) {
  return s.add(name, Tensor(Shape{n}));
}

MixMambaLayer make_layer(ParameterStore& s, const std::string& prefix, const ModelConfig& c,
                         bool mixture, Rng& rng, Rng& router_rng) {
  MixMambaLayer l;
  l.d_model = c.d_model;
  l.d_inner = c.d_inner();
  l.mixture = mixture;
  l.in_W = &dense_weight(s, prefix + ".in_W", l.d_model, l.d_inner, rng);
  l.in_b = &zeros(s, prefix + ".in_b", l.d_inner);
  l.gate_W = &dense_weight(s, prefix + ".gate_W", l.d_model, l.d_inner, rng);
  l.gate_b = &zeros(s, prefix + ".gate_b", l.d_inner);
  const SsmDims dims{l.d_inner, c.d_state, c.conv_width};
  l.fwd = make_ssm_unit(s, prefix + ".fwd", dims, rng, /*with_A=*/!mixture);
  l.bwd = make_ssm_unit(s, prefix + ".bwd", dims, rng, /*with_A=*/!mixture);
  l.out_W = &dense_weight(s, prefix + ".out_W", l.d_inner, l.d_model, rng);
  l.out_b = &zeros(s, prefix + ".out_b", l.d_model);
  if (mixture) {
    l.fwd_bank = make_expert_bank(s, prefix + ".fwd.A_log_bank", c.num_experts, l.d_inner,
                                  c.d_state, router_rng, c.expert_jitter);
    l.bwd_bank = make_expert_bank(s, prefix + ".bwd.A_log_bank", c.num_experts, l.d_inner,
                                  c.d_state, router_rng, c.expert_jitter);
    l.router = make_router(s, prefix + ".router", c.router_mode, l.d_model, c.num_experts,
                           router_rng);
  }
  return l;
}

}  // namespace

Var mixmamba_layer_forward(Var F, std::size_t observed_len, const MixMambaLayer& layer,
                           const LayerOptions& options, RouteDecision* route) {
  Graph& g = F.graph();
  const std::size_t T = F.value().dim(0);
  if (observed_len > T) throw std::invalid_argument("observed_len exceeds sequence length");

  Var u = ops::linear(F, g.param(*layer.in_W), g.param(*layer.in_b));
  Var fwd_in = ops::silu(ops::conv1d_causal(u, g.param(*layer.fwd.conv_kernel)));
  Var bwd_in =
      ops::silu(ops::conv1d_causal(ops::flip_rows(u), g.param(*layer.bwd.conv_kernel)));

  Var A_fwd, A_bwd;
  RouteDecision decision;
  if (layer.mixture) {
    const std::size_t gate_len = options.gate_on_observed_only ? observed_len : T;
    if (gate_len == 0) throw std::invalid_argument("mixture gate needs observed frames");
    decision = mixant::route(ops::slice_rows(F, 0, gate_len), layer.fwd_bank,
                             layer.bwd_bank, layer.router);
    A_fwd = decision.A_fwd;
    A_bwd = decision.A_bwd;
  } else {
    A_fwd = static_transition(g, layer.fwd);
    A_bwd = static_transition(g, layer.bwd);
  }

  Var W = s6_forward(fwd_in, layer.fwd, A_fwd, options.discretization);
  Var B = s6_forward(bwd_in, layer.bwd, A_bwd, options.discretization);
  if (layer.mixture && options.straight_through) {
    W = ops::straight_through(W, decision.gamma_fwd, decision.index_fwd);
    B = ops::straight_through(B, decision.gamma_bwd, decision.index_bwd);
  }
  Var R = ops::silu(ops::linear(F, g.param(*layer.gate_W), g.param(*layer.gate_b)));
  Var merged = ops::add(ops::mul(W, R), ops::mul(ops::flip_rows(B), R));
  if (route && layer.mixture) *route = decision;
  return ops::linear(merged, g.param(*layer.out_W), g.param(*layer.out_b));
}

Tensor step_embedding(std::size_t step, std::size_t dim) {
  Tensor e(Shape{dim});
  const std::size_t half = dim / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq =
        std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
    e[i] = std::sin(static_cast<double>(step) * freq);
    e[half + i] = std::cos(static_cast<double>(step) * freq);
  }
  return e;
}

MixAntModel::MixAntModel(const ModelConfig& config)
    : config_(config), store_(std::make_unique<ParameterStore>()) {
  config_.validate();
  const ModelConfig& c = config_;
  ParameterStore& s = *store_;
  Rng rng(c.seed);
  Rng router_rng = Rng::derive(c.seed, kRouterStream);

  embed_W_ = &dense_weight(s, "embed.W", c.num_classes + c.feature_dim, c.d_model, rng);
  embed_b_ = &zeros(s, "embed.b", c.d_model);
  time_W_ = &dense_weight(s, "time.W", c.d_model, c.d_model, rng);
  time_b_ = &zeros(s, "time.b", c.d_model);
  for (std::size_t k = 0; k < c.num_blocks; ++k) {
    const std::string p = "blocks." + std::to_string(k);
    Block b;
    b.ln_gain = &s.add(p + ".ln.gain", Tensor(Shape{c.d_model}, 1.0));
    b.ln_bias = &zeros(s, p + ".ln.bias", c.d_model);
    b.layer = make_layer(s, p + ".mixer", c, /*mixture=*/k >= c.static_blocks, rng, router_rng);
    const std::size_t hidden = c.d_model * c.mlp_ratio;
    b.mlp_W1 = &dense_weight(s, p + ".mlp.W1", c.d_model, hidden, rng);
    b.mlp_b1 = &zeros(s, p + ".mlp.b1", hidden);
    b.mlp_W2 = &dense_weight(s, p + ".mlp.W2", hidden, c.d_model, rng);
    b.mlp_b2 = &zeros(s, p + ".mlp.b2", c.d_model);
    blocks_.push_back(b);
  }
  head_W_ = &dense_weight(s, "head.W", c.d_model, c.num_classes, rng);
  head_b_ = &zeros(s, "head.b", c.num_classes);
}

MixAntModel::Output MixAntModel::forward(Graph& g, const Tensor& noisy,
                                         const Tensor& conditioning, std::size_t observed_len,
                                         std::size_t step) const {
  const ModelConfig& c = config_;
  if (noisy.rank() != 2 || conditioning.rank() != 2 || noisy.dim(0) != conditioning.dim(0) ||
      noisy.dim(1) != c.num_classes || conditioning.dim(1) != c.feature_dim) {
    throw ShapeError("model_forward: labels " + shape_string(noisy.shape()) +
                     " and conditioning " + shape_string(conditioning.shape()) +
                     " do not fit n_c=" + std::to_string(c.num_classes) +
                     ", n_d=" + std::to_string(c.feature_dim));
  }
  const LayerOptions options{c.discretization, c.gate_on_observed_only, c.straight_through};
  Output out;

  Var input = ops::concat_cols(g.constant(noisy), g.constant(conditioning));
  Var h = ops::linear(input, g.param(*embed_W_), g.param(*embed_b_));
  Var temb = ops::linear(g.constant(step_embedding(step, c.d_model)), g.param(*time_W_),
                         g.param(*time_b_));
  h = ops::add_row(h, temb);

  for (const Block& b : blocks_) {
    Var x = ops::layer_norm(h, g.param(*b.ln_gain), g.param(*b.ln_bias));
    RouteDecision route;
    Var mixed = mixmamba_layer_forward(x, observed_len, b.layer, options, &route);
    if (b.layer.mixture) out.routes.push_back(route);
    Var mlp = ops::linear(
        ops::gelu(ops::linear(mixed, g.param(*b.mlp_W1), g.param(*b.mlp_b1))),
        g.param(*b.mlp_W2), g.param(*b.mlp_b2));
    h = ops::add(mlp, h);
  }
  out.scores = ops::linear(h, g.param(*head_W_), g.param(*head_b_));
  return out;
}

MixAntModel::Prediction MixAntModel::predict(const Tensor& noisy, const Tensor& conditioning,
                                             std::size_t observed_len, std::size_t step) const {
  Graph g(/*grad_enabled=*/false);
  Output out = forward(g, noisy, conditioning, observed_len, step);
  Prediction p;
  p.scores = out.scores.value();
  for (const auto& r : out.routes) p.selections.push_back(r.index_fwd);
  return p;
}

}  // namespace mixant
