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
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixant/corpus.hpp"
#include "mixant/diffusion.hpp"
#include "mixant/gradcheck.hpp"
#include "mixant/model.hpp"
#include "mixant/optim.hpp"
#include "mixant/rng.hpp"

namespace mixant {

/// Raised when a loss or activation turns non-finite during training.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One denoising example: the first P + F frames of a video.
struct TrainingSample {
  Tensor noisy;         // [P+F, n_c]
  Tensor conditioning;  // [P+F, n_d], future rows zero
  Tensor target;        // [P+F, n_c], one-hot
  std::size_t observed = 0;
  std::size_t step = 0;
};

/// Window sizes for a video of n_v frames; throws std::invalid_argument when
/// P or F floors to zero or the window overruns the video.
struct Window {
  std::size_t observed;
  std::size_t future;
};
Window observation_window(std::size_t n_frames, double alpha, double beta);

/// Draws a diffusion step uniformly from 1..T and Gaussian label noise.
TrainingSample make_training_sample(const Video& video, Window window, std::size_t num_classes,
                                    const DiffusionSchedule& schedule, Rng& rng);

struct StepStats {
  double rec = 0.0;
  double lb = 0.0;
  double total = 0.0;
  std::vector<std::vector<double>> soft_usage;  // [gate][E], summed gammas
  std::vector<std::vector<double>> hard_usage;  // [gate][E], selection counts
};

/// Owns the optimizer state for one model.
class Trainer {
 public:
  Trainer(MixAntModel& model, const ModelConfig& config);

  /// Forward and backward over the batch, then one AdamW update. The
  /// objective is (1 - lambda) * mean MSE + lambda * load-balancing KL.
  StepStats step(std::span<const TrainingSample> batch);

  std::size_t gates() const noexcept { return gates_; }

 private:
  MixAntModel& model_;
  double lambda_;
  AdamW optimizer_;
  std::size_t gates_;
};

struct EpochLog {
  std::size_t epoch = 0;
  double rec = 0.0;  // means over the epoch's steps
  double lb = 0.0;
  double total = 0.0;
  std::vector<std::vector<double>> soft_usage;  // normalized per gate
  std::vector<std::vector<double>> hard_usage;  // counts per gate
};

struct TrainResult {
  std::unique_ptr<MixAntModel> model;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Trains a fresh model on the corpus training split.
TrainResult train(const ModelConfig& config, const Corpus& corpus,
                  const EpochCallback& on_epoch = {});

std::string to_json(const std::vector<EpochLog>& log, int indent = 2);

/// Finite-difference check of the full training objective on one random
/// sequence of `frames` frames, the first `observed` of them observed.
GradCheckResult model_gradient_check(MixAntModel& model, std::size_t frames, std::size_t observed,
                                     std::uint64_t seed, std::size_t stride = 1);

}  // namespace mixant
