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

#include "mixant/diffusion.hpp"
#include "mixant/ops.hpp"
#include "support.hpp"

namespace mixant {
namespace {

using testing::randn;

TEST(Schedule, LinearBetasAndDecreasingAlphaBar) {
  const DiffusionSchedule s;
  EXPECT_EQ(s.steps(), 1000u);
  EXPECT_DOUBLE_EQ(s.beta(1), 1e-4);
  EXPECT_DOUBLE_EQ(s.beta(1000), 0.02);
  EXPECT_NEAR(s.beta(500) - s.beta(499), (0.02 - 1e-4) / 999.0, 1e-15);
  EXPECT_EQ(s.alpha_bar(0), 1.0);
  double prod = 1.0;
  for (std::size_t t = 1; t <= 1000; ++t) {
    prod *= 1.0 - s.beta(t);
    EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
    EXPECT_NEAR(s.alpha_bar(t), prod, 1e-14);
  }
  EXPECT_LT(s.alpha_bar(1000), 1e-4);
  EXPECT_THROW(s.alpha_bar(1001), std::out_of_range);
}

TEST(Schedule, DdimStepsAreUniformAndDescending) {
  const DiffusionSchedule s;
  const auto steps = s.ddim_timesteps(50);
  ASSERT_EQ(steps.size(), 50u);
  EXPECT_EQ(steps.front(), 1000u);
  EXPECT_EQ(steps.back(), 20u);
  for (std::size_t i = 1; i < steps.size(); ++i) EXPECT_EQ(steps[i - 1] - steps[i], 20u);
  EXPECT_THROW(s.ddim_timesteps(1001), std::invalid_argument);
  EXPECT_THROW(s.ddim_timesteps(0), std::invalid_argument);
}

TEST(Conditioning, PadsFutureWithZeros) {
  const Tensor obs = Tensor::matrix({{1, 2}, {3, 4}});
  const ConditioningTensor c = build_conditioning(obs, 3);
  EXPECT_EQ(c.length(), 5u);
  EXPECT_EQ(c.features.shape(), (Shape{5, 2}));
  for (std::size_t t = 2; t < 5; ++t)
    for (std::size_t d = 0; d < 2; ++d) EXPECT_EQ(c.features.at(t, d), 0.0);
  EXPECT_EQ(build_conditioning(obs, 0).features, obs);
  EXPECT_THROW(build_conditioning(Tensor(Shape{0, 2}), 3), std::invalid_argument);
}

TEST(Conditioning, PaddedRegionHasZeroNormForRandomInputs) {
  Rng rng(1);
  for (int trial = 0; trial < 25; ++trial) {
    const auto P = static_cast<std::size_t>(rng.uniform_int(1, 9));
    const auto F = static_cast<std::size_t>(rng.uniform_int(0, 9));
    const ConditioningTensor c = build_conditioning(rng.normal_tensor({P, 3}), F);
    double norm = 0.0;
    for (std::size_t t = P; t < P + F; ++t)
      for (std::size_t d = 0; d < 3; ++d) norm += c.features.at(t, d) * c.features.at(t, d);
    EXPECT_EQ(norm, 0.0);
  }
}

TEST(ForwardDiffuse, LimitsAndClosedForm) {
  const DiffusionSchedule s;
  const Tensor y0 = one_hot({0, 2, 1}, 3);
  const Tensor zero(Shape{3, 3});
  const Tensor a = forward_diffuse(y0, 300, zero, s);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(a[i], std::sqrt(s.alpha_bar(300)) * y0[i]);
  const Tensor eps = randn({3, 3}, 2);
  const Tensor b = forward_diffuse(y0, 1000, eps, s);
  EXPECT_LE(max_abs_diff(b, eps), 0.01);
  EXPECT_THROW(forward_diffuse(y0, 1001, eps, s), std::out_of_range);
}

TEST(ForwardDiffuse, MarginalVarianceMatchesMonteCarlo) {
  const DiffusionSchedule s;
  const std::size_t t = 250, n = 10000;
  // Y0 entries: a one-hot row over 4 classes has Var = p (1 - p) with p = 1/4
  // when the hot index is uniform.
  Rng rng(3);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int hot = static_cast<int>(rng.uniform_int(0, 3));
    const Tensor y = forward_diffuse(one_hot({hot}, 4), t, rng.normal_tensor({1, 4}), s);
    sum += y[0];
    sq += y[0] * y[0];
  }
  const double mean = sum / n, var = sq / n - mean * mean;
  const double ab = s.alpha_bar(t);
  const double expect = ab * 0.25 * 0.75 + (1.0 - ab);
  // Standard error of a sample variance is about var * sqrt(2 / n).
  EXPECT_NEAR(var, expect, 3.0 * expect * std::sqrt(2.0 / n));
}

TEST(Ddim, ConstantOracleIsAFixedPoint) {
  const DiffusionSchedule s;
  const ConditioningTensor cond = build_conditioning(randn({3, 2}, 4), 2);
  const Tensor target = randn({5, 4}, 5);
  const Denoiser oracle = [&](const Tensor&, const ConditioningTensor&, std::size_t) { return target; };
  for (std::size_t steps : {1u, 7u, 50u}) {
    Rng rng(6);
    EXPECT_EQ(ddim_sample(oracle, cond, 4, s, steps, rng), target);
  }
}

TEST(Ddim, SeedDeterminesSample) {
  const DiffusionSchedule s;
  const ConditioningTensor cond = build_conditioning(randn({3, 2}, 7), 2);
  // A denoiser that depends on its input keeps the initial draw visible.
  const Denoiser shrink = [](const Tensor& y, const ConditioningTensor&, std::size_t) {
    Tensor out = y;
    for (double& v : out.data()) v = std::tanh(v);
    return out;
  };
  Rng a(8), b(8), c(9);
  const Tensor sa = ddim_sample(shrink, cond, 3, s, 10, a);
  EXPECT_EQ(sa, ddim_sample(shrink, cond, 3, s, 10, b));
  EXPECT_NE(sa, ddim_sample(shrink, cond, 3, s, 10, c));
  Rng d(8);
  EXPECT_THROW(ddim_sample(shrink, cond, 3, s, 1001, d), std::invalid_argument);
}

TEST(Ddim, TwoStepUpdateMatchesHandComputation) {
  const DiffusionSchedule s(10, 0.01, 0.2);
  const ConditioningTensor cond = build_conditioning(Tensor::matrix({{1.0}}), 0);
  std::vector<std::size_t> seen;
  const Denoiser half = [&](const Tensor& y, const ConditioningTensor&, std::size_t t) {
    seen.push_back(t);
    Tensor out = y;
    for (double& v : out.data()) v = 0.5 * v + 0.1 * static_cast<double>(t);
    return out;
  };
  const Tensor y_T = Tensor::matrix({{0.3, -1.2}});
  const Tensor out = ddim_sample_from(half, cond, y_T, s, 2);
  ASSERT_EQ(seen, (std::vector<std::size_t>{10, 5}));
  for (std::size_t k = 0; k < 2; ++k) {
    const double x0 = 0.5 * y_T[k] + 1.0;
    const double eps = (y_T[k] - std::sqrt(s.alpha_bar(10)) * x0) / std::sqrt(1.0 - s.alpha_bar(10));
    const double y5 = std::sqrt(s.alpha_bar(5)) * x0 + std::sqrt(1.0 - s.alpha_bar(5)) * eps;
    EXPECT_NEAR(out[k], 0.5 * y5 + 0.5, 1e-14);
  }
}

TEST(Ddim, PerfectOracleReturnsCleanLabels) {
  const DiffusionSchedule s;
  const Tensor y0 = one_hot({1, 1, 0, 2}, 3);
  const ConditioningTensor cond = build_conditioning(randn({2, 2}, 10), 2);
  const Denoiser oracle = [&](const Tensor&, const ConditioningTensor&, std::size_t) { return y0; };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(ddim_sample(oracle, cond, 3, s, 50, rng), y0);
  }
}

TEST(Losses, ReconstructionIsMeanSquaredError) {
  const Tensor y = one_hot({0, 3}, 4);
  EXPECT_EQ(reconstruction_loss(y, y), 0.0);
  EXPECT_DOUBLE_EQ(reconstruction_loss(y, Tensor(Shape{2, 4})), 0.25);
  const Tensor a = randn({3, 5}, 11), b = randn({3, 5}, 12);
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) s += (a.at(i, j) - b.at(i, j)) * (a.at(i, j) - b.at(i, j));
  EXPECT_NEAR(reconstruction_loss(a, b), s / 15.0, 1e-14);
  Graph g;
  EXPECT_NEAR(ops::mse(g.constant(a), g.constant(b)).value().item(), s / 15.0, 1e-14);
  EXPECT_THROW(reconstruction_loss(a, Tensor(Shape{5, 3})), ShapeError);
}

TEST(Losses, TotalLossWeighting) {
  EXPECT_EQ(total_loss(0.7, 5.0, 0.0), 0.7);
  EXPECT_NEAR(total_loss(1.0, 2.0, 0.15), 1.15, 1e-15);
  EXPECT_THROW(total_loss(1.0, 2.0, 1.0), std::invalid_argument);
  EXPECT_THROW(total_loss(1.0, 2.0, -0.1), std::invalid_argument);
  Graph g;
  const Var v = total_loss(g.constant(Tensor::scalar(1.0)), g.constant(Tensor::scalar(2.0)), 0.15);
  EXPECT_NEAR(v.value().item(), 1.15, 1e-15);
}

TEST(Labels, OneHotAndArgmax) {
  const Tensor h = one_hot({2, 0}, 3);
  EXPECT_EQ(h, Tensor::matrix({{0, 0, 1}, {1, 0, 0}}));
  EXPECT_EQ(argmax_rows(h), (std::vector<int>{2, 0}));
  EXPECT_EQ(argmax_rows(Tensor::matrix({{0.5, 0.5, 0.1}})), (std::vector<int>{0}));
  EXPECT_THROW(one_hot({3}, 3), std::out_of_range);
}

}  // namespace
}  // namespace mixant
