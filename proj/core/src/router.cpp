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

#include "mixant/router.hpp"

#include <cmath>
#include <stdexcept>

#include "mixant/ops.hpp"
#include "mixant/ssm.hpp"

namespace mixant {

RouterMode parse_router_mode(const std::string& s) {
  if (s == "unified") return RouterMode::unified;
  if (s == "independent") return RouterMode::independent;
  throw std::invalid_argument("unknown router mode '" + s + "'");
}

std::string to_string(RouterMode mode) {
  return mode == RouterMode::unified ? "unified" : "independent";
}

ExpertBank make_expert_bank(ParameterStore& store, const std::string& name,
                            std::size_t experts, std::size_t channels, std::size_t state,
                            Rng& rng, double jitter) {
  if (experts == 0) throw std::invalid_argument("expert bank needs at least one expert");
  const Tensor base = s4d_real_log_init(channels, state);
  Tensor bank(Shape{experts, channels, state});
  for (std::size_t e = 0; e < experts; ++e)
    for (std::size_t i = 0; i < base.size(); ++i)
      bank[e * base.size() + i] = base[i] + (e == 0 ? 0.0 : jitter * rng.normal());
  return ExpertBank{&store.add(name, std::move(bank))};
}

Var expert_transition(Graph& g, const ExpertBank& bank, std::size_t e) {
  return ops::neg_exp(ops::take(g.param(*bank.A_log_bank), e));
}

Tensor compute_gating(const Tensor& x_obs, const Tensor& W_g) {
  if (x_obs.rank() != 2 || x_obs.dim(0) == 0) {
    throw std::invalid_argument("compute_gating: need at least one observed position");
  }
  const std::size_t P = x_obs.dim(0), D = x_obs.dim(1);
  Tensor mean(Shape{D});
  for (std::size_t t = 0; t < P; ++t)
    for (std::size_t d = 0; d < D; ++d) mean[d] += x_obs.at(t, d);
  for (auto& v : mean.data()) v /= static_cast<double>(P);
  return softmax(linear(mean, W_g));
}

Var compute_gating(Var x_obs, Var W_g) {
  if (x_obs.value().rank() != 2 || x_obs.value().dim(0) == 0) {
    throw std::invalid_argument("compute_gating: need at least one observed position");
  }
  return ops::softmax(ops::linear(ops::mean_rows(x_obs), W_g));
}

std::size_t select_expert(std::span<const double> gamma) {
  std::size_t best = 0;
  for (std::size_t e = 1; e < gamma.size(); ++e) {
    if (gamma[e] > gamma[best]) best = e;
  }
  return best;
}

Router make_router(ParameterStore& store, const std::string& prefix, RouterMode mode,
                   std::size_t channels, std::size_t experts, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(channels));
  Router r;
  r.mode = mode;
  r.W_g_fwd = &store.add(prefix + ".W_g", rng.normal_tensor({channels, experts}, s));
  if (mode == RouterMode::independent) {
    r.W_g_bwd = &store.add(prefix + ".W_g_bwd", rng.normal_tensor({channels, experts}, s));
  }
  return r;
}

RouteDecision route(Var x_obs, const ExpertBank& fwd_bank, const ExpertBank& bwd_bank,
                    const Router& router) {
  Graph& g = x_obs.graph();
  RouteDecision d;
  d.gamma_fwd = compute_gating(x_obs, g.param(*router.W_g_fwd));
  d.index_fwd = select_expert(d.gamma_fwd.value().data());
  if (router.mode == RouterMode::unified) {
    d.gamma_bwd = d.gamma_fwd;
    d.index_bwd = d.index_fwd;
  } else {
    d.gamma_bwd = compute_gating(x_obs, g.param(*router.W_g_bwd));
    d.index_bwd = select_expert(d.gamma_bwd.value().data());
  }
  d.A_fwd = expert_transition(g, fwd_bank, d.index_fwd);
  d.A_bwd = expert_transition(g, bwd_bank, d.index_bwd);
  return d;
}

Tensor accumulate_usage(const Tensor& gammas) {
  if (gammas.rank() != 2) throw ShapeError("accumulate_usage: expected [B, E]");
  const std::size_t B = gammas.dim(0), E = gammas.dim(1);
  Tensor c(Shape{E});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t e = 0; e < E; ++e) c[e] += gammas.at(b, e);
  return c;
}

Var accumulate_usage(std::span<const Var> gammas) {
  if (gammas.empty()) throw std::invalid_argument("accumulate_usage: empty batch");
  Var c = gammas[0];
  for (std::size_t b = 1; b < gammas.size(); ++b) c = ops::add(c, gammas[b]);
  return c;
}

double load_balance_loss(std::span<const Tensor> usage_per_layer) {
  if (usage_per_layer.empty()) throw std::invalid_argument("load_balance_loss: no layers");
  double total = 0.0;
  for (const Tensor& c : usage_per_layer) {
    double s = 0.0;
    for (double v : c.data()) s += v;
    if (!(s > 0.0)) throw std::invalid_argument("load_balance_loss: usage sum must be positive");
    const double E = static_cast<double>(c.size());
    for (double v : c.data()) {
      const double p = v / s;
      if (p > 0.0) total += p * std::log(p * E);
    }
  }
  return total;
}

Var load_balance_loss(std::span<const Var> usage_per_layer) {
  if (usage_per_layer.empty()) throw std::invalid_argument("load_balance_loss: no layers");
  Var total = ops::kl_to_uniform(usage_per_layer[0]);
  for (std::size_t k = 1; k < usage_per_layer.size(); ++k) {
    total = ops::add(total, ops::kl_to_uniform(usage_per_layer[k]));
  }
  return total;
}

SelectionMatrix::SelectionMatrix(std::size_t blocks, std::size_t experts)
    : blocks_(blocks), experts_(experts), matrix_(Shape{blocks, experts}) {}

std::vector<int> SelectionMatrix::flatten() const {
  std::vector<int> out(matrix_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = matrix_[i] != 0.0 ? 1 : 0;
  return out;
}

SelectionMatrix record_selection(std::span<const std::size_t> indices, std::size_t experts) {
  SelectionMatrix s(indices.size(), experts);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= experts) {
      throw std::out_of_range("record_selection: expert index " + std::to_string(indices[k]) +
                              " >= " + std::to_string(experts));
    }
    s.matrix_.at(k, indices[k]) = 1.0;
  }
  return s;
}

}  // namespace mixant
