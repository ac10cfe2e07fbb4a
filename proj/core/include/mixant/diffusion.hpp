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
#include <functional>
#include <vector>

#include "mixant/autograd.hpp"
#include "mixant/rng.hpp"
#include "mixant/tensor.hpp"

namespace mixant {

class MixAntModel;

/// Linear beta schedule over steps 1..T with cumulative products
/// alpha_bar(t) = prod_{s<=t} (1 - beta_s) and alpha_bar(0) = 1.
class DiffusionSchedule {
 public:
  explicit DiffusionSchedule(std::size_t steps = 1000, double beta_start = 1e-4,
                             double beta_end = 0.02);

  std::size_t steps() const noexcept { return steps_; }
  double beta(std::size_t t) const;
  double alpha_bar(std::size_t t) const;

  /// `count` uniformly spaced steps in descending order, starting at T and
  /// ending at T / count. Throws std::invalid_argument if count > T.
  std::vector<std::size_t> ddim_timesteps(std::size_t count) const;

 private:
  std::size_t steps_;
  std::vector<double> betas_;      // index t, betas_[0] unused
  std::vector<double> alpha_bar_;  // index t, alpha_bar_[0] = 1
};

/// Observed features followed by an all-zero future block.
struct ConditioningTensor {
  Tensor features;  // [(P + F), n_d]
  std::size_t observed = 0;
  std::size_t future = 0;

  std::size_t length() const noexcept { return observed + future; }
};

ConditioningTensor build_conditioning(const Tensor& observed_features, std::size_t future);

/// sqrt(alpha_bar_t) * y0 + sqrt(1 - alpha_bar_t) * noise.
Tensor forward_diffuse(const Tensor& y0, std::size_t t, const Tensor& noise,
                       const DiffusionSchedule& schedule);

/// Predicts clean labels from (noisy labels, conditioning, step).
using Denoiser =
    std::function<Tensor(const Tensor& noisy, const ConditioningTensor& cond, std::size_t step)>;

Denoiser model_denoiser(const MixAntModel& model);

/// Deterministic (eta = 0) DDIM sampling with an x0-predicting denoiser,
/// starting from Y_T ~ N(0, I) drawn from `rng`. Returns the final x0
/// prediction, [(P + F), num_classes].
Tensor ddim_sample(const Denoiser& denoiser, const ConditioningTensor& cond,
                   std::size_t num_classes, const DiffusionSchedule& schedule,
                   std::size_t num_steps, Rng& rng);

/// Same, from a caller-supplied initial draw.
Tensor ddim_sample_from(const Denoiser& denoiser, const ConditioningTensor& cond,
                        Tensor initial, const DiffusionSchedule& schedule,
                        std::size_t num_steps);

/// Mean squared error over every frame and class.
double reconstruction_loss(const Tensor& target, const Tensor& predicted);

/// (1 - lambda) * rec + lambda * lb, with lambda in [0, 1).
double total_loss(double rec, double lb, double lambda);
Var total_loss(Var rec, Var lb, double lambda);

/// One-hot [labels.size(), num_classes].
Tensor one_hot(const std::vector<int>& labels, std::size_t num_classes);
/// Row-wise argmax, ties to the lowest class.
std::vector<int> argmax_rows(const Tensor& scores);

}  // namespace mixant
