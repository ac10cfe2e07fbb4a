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

#include "mixant/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "mixant/model.hpp"
#include "mixant/ops.hpp"

namespace mixant {

DiffusionSchedule::DiffusionSchedule(std::size_t steps, double beta_start, double beta_end)
    : steps_(steps), betas_(steps + 1, 0.0), alpha_bar_(steps + 1, 1.0) {
  if (steps == 0) throw std::invalid_argument("diffusion schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_end >= beta_start && beta_end < 1.0)) {
    throw std::invalid_argument("diffusion schedule needs 0 < beta_start <= beta_end < 1");
  }
  for (std::size_t t = 1; t <= steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(steps - 1);
    betas_[t] = beta_start + (beta_end - beta_start) * frac;
    alpha_bar_[t] = alpha_bar_[t - 1] * (1.0 - betas_[t]);
  }
}

double DiffusionSchedule::beta(std::size_t t) const {
  if (t == 0 || t > steps_) throw std::out_of_range("diffusion step out of range");
  return betas_[t];
}

double DiffusionSchedule::alpha_bar(std::size_t t) const {
  if (t > steps_) throw std::out_of_range("diffusion step out of range");
  return alpha_bar_[t];
}

std::vector<std::size_t> DiffusionSchedule::ddim_timesteps(std::size_t count) const {
  if (count == 0 || count > steps_) {
    throw std::invalid_argument("DDIM step count must lie in [1, " + std::to_string(steps_) + "]");
  }
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t i = count; i >= 1; --i) out.push_back(i * steps_ / count);
  return out;
}

ConditioningTensor build_conditioning(const Tensor& observed_features, std::size_t future) {
  if (observed_features.rank() != 2 || observed_features.dim(0) == 0) {
    throw std::invalid_argument("build_conditioning: need [P, n_d] with P >= 1");
  }
  const std::size_t P = observed_features.dim(0), nd = observed_features.dim(1);
  ConditioningTensor c;
  c.observed = P;
  c.future = future;
  c.features = Tensor(Shape{P + future, nd});
  std::copy(observed_features.data().begin(), observed_features.data().end(),
            c.features.data().begin());
  return c;
}

Tensor forward_diffuse(const Tensor& y0, std::size_t t, const Tensor& noise,
                       const DiffusionSchedule& schedule) {
  if (y0.shape() != noise.shape()) throw ShapeError("forward_diffuse: noise shape mismatch");
  const double ab = schedule.alpha_bar(t);
  const double s = std::sqrt(ab), n = std::sqrt(1.0 - ab);
  Tensor out(y0.shape());
  for (std::size_t i = 0; i < y0.size(); ++i) out[i] = s * y0[i] + n * noise[i];
  return out;
}

Denoiser model_denoiser(const MixAntModel& model) {
  return [&model](const Tensor& noisy, const ConditioningTensor& cond, std::size_t step) {
    return model.predict(noisy, cond.features, cond.observed, step).scores;
  };
}

Tensor ddim_sample(const Denoiser& denoiser, const ConditioningTensor& cond,
                   std::size_t num_classes, const DiffusionSchedule& schedule,
                   std::size_t num_steps, Rng& rng) {
  schedule.ddim_timesteps(num_steps);  // validates before drawing
  return ddim_sample_from(denoiser, cond, rng.normal_tensor({cond.length(), num_classes}),
                          schedule, num_steps);
}

Tensor ddim_sample_from(const Denoiser& denoiser, const ConditioningTensor& cond,
                        Tensor initial, const DiffusionSchedule& schedule,
                        std::size_t num_steps) {
  const std::vector<std::size_t> steps = schedule.ddim_timesteps(num_steps);
  Tensor y = std::move(initial);
  Tensor x0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::size_t t = steps[i];
    x0 = denoiser(y, cond, t);
    if (x0.shape() != y.shape()) throw ShapeError("denoiser changed the sample shape");
    if (i + 1 == steps.size()) break;
    const std::size_t next = steps[i + 1];
    const double ab = schedule.alpha_bar(t), ab_next = schedule.alpha_bar(next);
    const double sa = std::sqrt(ab), sn = std::sqrt(1.0 - ab);
    const double sa_next = std::sqrt(ab_next), sn_next = std::sqrt(1.0 - ab_next);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double eps = (y[k] - sa * x0[k]) / sn;
      y[k] = sa_next * x0[k] + sn_next * eps;
    }
  }
  return x0;
}

double reconstruction_loss(const Tensor& target, const Tensor& predicted) {
  if (target.shape() != predicted.shape()) throw ShapeError("reconstruction_loss: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = target[i] - predicted[i];
    s += d * d;
  }
  return s / static_cast<double>(target.size());
}

namespace {
void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("lambda_lb must lie in [0, 1)");
  }
}
}  // namespace

double total_loss(double rec, double lb, double lambda) {
  check_lambda(lambda);
  return (1.0 - lambda) * rec + lambda * lb;
}

Var total_loss(Var rec, Var lb, double lambda) {
  check_lambda(lambda);
  return ops::add(ops::scale(rec, 1.0 - lambda), ops::scale(lb, lambda));
}

Tensor one_hot(const std::vector<int>& labels, std::size_t num_classes) {
  Tensor out(Shape{labels.size(), num_classes});
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] < 0 || static_cast<std::size_t>(labels[t]) >= num_classes) {
      throw std::out_of_range("one_hot: label out of range");
    }
    out.at(t, static_cast<std::size_t>(labels[t])) = 1.0;
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor& scores) {
  std::vector<int> out(scores.rows());
  const std::size_t c = scores.cols();
  for (std::size_t r = 0; r < out.size(); ++r) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j) {
      if (scores[r * c + j] > scores[r * c + best]) best = j;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

}  // namespace mixant
