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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mixant/gradcheck.hpp"
#include "mixant/ops.hpp"
#include "mixant/router.hpp"
#include "mixant/ssm.hpp"
#include "support.hpp"

namespace mixant {
namespace {

using testing::randn;

TEST(Gating, ZeroProjectionIsUniform) {
  const Tensor g = compute_gating(randn({5, 4}, 1), Tensor(Shape{4, 3}));
  for (double v : g.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(Gating, ClosedFormTwoExperts) {
  // mean(x) = (1, 0); W_g maps it to logits (ln 2, 0).
  const Tensor x = Tensor::matrix({{2.0, 0.0}, {0.0, 0.0}});
  const Tensor W = Tensor::matrix({{std::log(2.0), 0.0}, {5.0, 5.0}});
  const Tensor g = compute_gating(x, W);
  EXPECT_NEAR(g[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(g[1], 1.0 / 3.0, 1e-15);
}

TEST(Gating, MatchesMeanProjectSoftmaxOracle) {
  const Tensor x = randn({5, 4}, 2), W = randn({4, 3}, 3);
  const Tensor g = compute_gating(x, W);
  double logits[3] = {0, 0, 0};
  for (std::size_t e = 0; e < 3; ++e)
    for (std::size_t d = 0; d < 4; ++d) {
      double m = 0.0;
      for (std::size_t t = 0; t < 5; ++t) m += x.at(t, d);
      logits[e] += m / 5.0 * W.at(d, e);
    }
  double z = 0.0;
  for (double l : logits) z += std::exp(l);
  double total = 0.0;
  for (std::size_t e = 0; e < 3; ++e) {
    EXPECT_NEAR(g[e], std::exp(logits[e]) / z, 1e-14);
    total += g[e];
  }
  EXPECT_NEAR(total, 1.0, 1e-9);

  Graph graph;
  const Tensor gv = compute_gating(graph.constant(x), graph.constant(W)).value();
  EXPECT_LE(max_abs_diff(gv, g), 1e-15);
}

TEST(Gating, RejectsEmptyObservation) {
  EXPECT_THROW(compute_gating(Tensor(Shape{0, 4}), Tensor(Shape{4, 2})), std::invalid_argument);
}

TEST(SelectExpert, ArgmaxWithLowestIndexTies) {
  EXPECT_EQ(select_expert(Tensor::vector({0.2, 0.5, 0.3}).data()), 1u);
  EXPECT_EQ(select_expert(Tensor::vector({0.5, 0.5}).data()), 0u);
  EXPECT_EQ(select_expert(Tensor::vector({1.0}).data()), 0u);
}

TEST(SelectExpert, InvariantToMonotoneRescalingOfLogits) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Tensor logits = randn({6}, seed);
    const std::size_t base = select_expert(softmax(logits).data());
    Tensor scaled = logits;
    for (double& v : scaled.data()) v = 3.0 * v + 7.0;
    EXPECT_EQ(select_expert(softmax(scaled).data()), base);
    EXPECT_EQ(select_expert(logits.data()), base);
  }
}

struct RouterFixture {
  ParameterStore store;
  ExpertBank fwd, bwd;
  Router router;
  RouterFixture(RouterMode mode, std::size_t E, std::uint64_t seed, std::size_t D = 4) {
    Rng rng(seed);
    fwd = make_expert_bank(store, "fwd", E, D, 3, rng);
    bwd = make_expert_bank(store, "bwd", E, D, 3, rng);
    router = make_router(store, "router", mode, D, E, rng);
  }
};

TEST(Route, UnifiedSharesOneIndex) {
  RouterFixture f(RouterMode::unified, 4, 4);
  EXPECT_EQ(f.router.W_g_bwd, nullptr);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g;
    const RouteDecision d = route(g.constant(randn({3, 4}, seed)), f.fwd, f.bwd, f.router);
    EXPECT_EQ(d.index_fwd, d.index_bwd);
    EXPECT_EQ(d.index_fwd, select_expert(d.gamma_fwd.value().data()));
    const Tensor expect_fwd = ops::neg_exp(ops::take(g.param(*f.fwd.A_log_bank), d.index_fwd)).value();
    const Tensor expect_bwd = ops::neg_exp(ops::take(g.param(*f.bwd.A_log_bank), d.index_fwd)).value();
    EXPECT_EQ(d.A_fwd.value(), expect_fwd);
    EXPECT_EQ(d.A_bwd.value(), expect_bwd);
  }
}

TEST(Route, UnifiedPicksHighGammaExpertForBothBanks) {
  RouterFixture f(RouterMode::unified, 2, 5, 2);
  // gamma = softmax(mean(x) W) = (0.1, 0.9) for mean(x) = (1, 0).
  f.router.W_g_fwd->value = Tensor::matrix({{0.0, std::log(9.0)}, {0.0, 0.0}});
  Graph g;
  const RouteDecision d = route(g.constant(Tensor::matrix({{1.0, 0.0}})), f.fwd, f.bwd, f.router);
  EXPECT_NEAR(d.gamma_fwd.value()[1], 0.9, 1e-15);
  EXPECT_EQ(d.index_fwd, 1u);
  EXPECT_EQ(d.index_bwd, 1u);
}

TEST(Route, IndependentWithTiedGatesAgrees) {
  RouterFixture f(RouterMode::independent, 5, 6);
  f.router.W_g_bwd->value = f.router.W_g_fwd->value;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Graph g;
    const RouteDecision d = route(g.constant(randn({3, 4}, 100 + seed)), f.fwd, f.bwd, f.router);
    EXPECT_EQ(d.index_fwd, d.index_bwd);
  }
}

TEST(Route, IndependentGatesDivergeFromUnified) {
  std::size_t differing = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RouterFixture f(RouterMode::independent, 4, 200 + seed);
    Graph g;
    const RouteDecision d = route(g.constant(randn({4, 4}, 300 + seed, 3.0)), f.fwd, f.bwd, f.router);
    differing += d.index_fwd != d.index_bwd;
    ++total;
  }
  EXPECT_GT(differing, 0u);
  EXPECT_LT(differing, total);
}

TEST(Route, IndexCarriesNoGradientToGateButExpertsLearn) {
  RouterFixture f(RouterMode::unified, 3, 7);
  Graph g;
  const RouteDecision d = route(g.constant(randn({3, 4}, 8)), f.fwd, f.bwd, f.router);
  g.backward(ops::sum(d.A_fwd));
  for (double v : f.router.W_g_fwd->grad.data()) EXPECT_EQ(v, 0.0);
  const Tensor& gb = f.fwd.A_log_bank->grad;
  const std::size_t slot = 4 * 3;
  for (std::size_t e = 0; e < 3; ++e)
    for (std::size_t i = 0; i < slot; ++i) {
      if (e == d.index_fwd) {
        EXPECT_NE(gb[e * slot + i], 0.0);
      } else {
        EXPECT_EQ(gb[e * slot + i], 0.0);
      }
    }
}

TEST(ExpertBank, FirstExpertIsStaticInitAndAllNegative) {
  ParameterStore s;
  Rng rng(9);
  const ExpertBank b = make_expert_bank(s, "bank", 4, 3, 5, rng);
  const Tensor base = s4d_real_log_init(3, 5);
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(b.A_log_bank->value[i], base[i]);
  Graph g;
  for (std::size_t e = 0; e < 4; ++e)
    for (double a : expert_transition(g, b, e).value().data()) EXPECT_LT(a, 0.0);
  EXPECT_NE(b.A_log_bank->value[base.size()], base[0]);
}

TEST(Usage, SoftCountCases) {
  const Tensor c = accumulate_usage(Tensor::matrix({{1, 0}, {0, 1}}));
  EXPECT_EQ(c, Tensor::vector({1, 1}));
  const Tensor u = accumulate_usage(Tensor::matrix({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}}));
  EXPECT_EQ(u, Tensor::vector({1.5, 1.5}));
  const Tensor r = softmax(randn({7, 4}, 10));
  const Tensor s = accumulate_usage(r);
  double total = 0.0;
  for (std::size_t e = 0; e < 4; ++e) {
    double col = 0.0;
    for (std::size_t b = 0; b < 7; ++b) col += r.at(b, e);
    EXPECT_NEAR(s[e], col, 1e-14);
    total += s[e];
  }
  EXPECT_NEAR(total, 7.0, 1e-12);

  Graph g;
  std::vector<Var> rows;
  for (std::size_t b = 0; b < 7; ++b) {
    Tensor row(Shape{4});
    for (std::size_t e = 0; e < 4; ++e) row[e] = r.at(b, e);
    rows.push_back(g.constant(row));
  }
  EXPECT_LE(max_abs_diff(accumulate_usage(rows).value(), s), 1e-15);
}

TEST(LoadBalance, ClosedForms) {
  const std::vector<Tensor> uniform = {Tensor::vector({2, 2, 2}), Tensor::vector({0.5, 0.5})};
  EXPECT_EQ(load_balance_loss(uniform), 0.0);
  const std::vector<Tensor> point = {Tensor::vector({1, 0})};
  EXPECT_NEAR(load_balance_loss(point), std::log(2.0), 1e-12);
  const std::vector<Tensor> single = {Tensor::vector({3.0})};
  EXPECT_EQ(load_balance_loss(single), 0.0);
  EXPECT_THROW(load_balance_loss(std::vector<Tensor>{}), std::invalid_argument);
  EXPECT_THROW(load_balance_loss(std::vector<Tensor>{Tensor::vector({0, 0})}), std::invalid_argument);

  Graph g;
  std::vector<Var> vars = {g.constant(Tensor::vector({1, 0}))};
  EXPECT_NEAR(load_balance_loss(vars).value().item(), std::log(2.0), 1e-12);
  std::vector<Var> uvars = {g.constant(Tensor::vector({1, 1, 1, 1}))};
  EXPECT_EQ(load_balance_loss(uvars).value().item(), 0.0);
}

TEST(LoadBalance, SumsPerLayerKl) {
  std::vector<Tensor> layers;
  double expect = 0.0;
  for (std::uint64_t k = 0; k < 3; ++k) {
    Tensor c = softmax(randn({5}, 20 + k, 2.0));
    for (double& v : c.data()) v *= 3.0;
    double kl = 0.0;
    for (double v : c.data()) {
      const double p = v / 3.0;
      kl += p * (std::log(p) - std::log(0.2));
    }
    expect += kl;
    layers.push_back(c);
  }
  EXPECT_NEAR(load_balance_loss(layers), expect, 1e-12);
}

TEST(LoadBalance, GradientReachesGate) {
  ParameterStore s;
  s.add("W", randn({4, 3}, 30));
  const Tensor x1 = randn({3, 4}, 31), x2 = randn({2, 4}, 32);
  const auto r = finite_difference_check(s, [&](Graph& g) {
    Var W = g.param(s.get("W"));
    std::vector<Var> gammas = {compute_gating(g.constant(x1), W), compute_gating(g.constant(x2), W)};
    std::vector<Var> usage = {accumulate_usage(gammas)};
    return load_balance_loss(usage);
  });
  EXPECT_LE(r.max_rel_error, 1e-6);
}

TEST(Selection, MatrixFromIndices) {
  const std::vector<std::size_t> idx = {0, 2};
  const SelectionMatrix m = record_selection(idx, 3);
  EXPECT_EQ(m.matrix(), Tensor::matrix({{1, 0, 0}, {0, 0, 1}}));
  EXPECT_EQ(m.flatten(), (std::vector<int>{1, 0, 0, 0, 0, 1}));
  const std::vector<std::size_t> same = {1, 1, 1};
  const SelectionMatrix c = record_selection(same, 2);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(c.matrix().at(k, 0), 0.0);
    EXPECT_EQ(c.matrix().at(k, 1), 1.0);
  }
  const std::vector<std::size_t> bad = {0, 3};
  EXPECT_THROW(record_selection(bad, 3), std::out_of_range);
}

TEST(Selection, RowsSumToOne) {
  Rng rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> idx(6);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_int(0, 4));
    const SelectionMatrix m = record_selection(idx, 5);
    for (std::size_t k = 0; k < 6; ++k) {
      double row = 0.0;
      for (std::size_t e = 0; e < 5; ++e) {
        const double v = m.matrix().at(k, e);
        EXPECT_TRUE(v == 0.0 || v == 1.0);
        row += v;
      }
      EXPECT_EQ(row, 1.0);
    }
  }
}

TEST(RouterMode, ParsesNames) {
  EXPECT_EQ(parse_router_mode("unified"), RouterMode::unified);
  EXPECT_EQ(parse_router_mode("independent"), RouterMode::independent);
  EXPECT_THROW(parse_router_mode("both"), std::invalid_argument);
  EXPECT_EQ(to_string(RouterMode::independent), "independent");
}

}  // namespace
}  // namespace mixant
