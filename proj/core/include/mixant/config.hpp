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
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixant/router.hpp"
#include "mixant/ssm.hpp"

namespace mixant {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Architecture, diffusion and optimization hyperparameters.
struct ModelConfig {
  // Architecture.
  std::size_t num_classes = 8;   // n_c
  std::size_t feature_dim = 16;  // n_d
  std::size_t d_model = 64;
  std::size_t expand = 2;
  std::size_t d_state = 16;
  std::size_t conv_width = 4;
  std::size_t mlp_ratio = 4;
  std::size_t num_blocks = 15;     // K
  std::size_t static_blocks = 3;   // K0; blocks K0+1..K are mixture blocks
  std::size_t num_experts = 5;     // E
  RouterMode router_mode = RouterMode::unified;
  bool gate_on_observed_only = true;
  bool straight_through = false;
  InputDiscretization discretization = InputDiscretization::zoh;
  double expert_jitter = 0.5;

  // Diffusion.
  std::size_t diffusion_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  std::size_t ddim_steps = 50;

  // Optimization.
  double lambda_lb = 0.15;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double learning_rate = 5e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  std::vector<double> train_alphas{0.2, 0.3};
  std::vector<double> train_betas{0.1, 0.2, 0.3, 0.5};
  std::uint64_t seed = 0;

  std::size_t mixture_blocks() const noexcept { return num_blocks - static_blocks; }
  std::size_t d_inner() const noexcept { return d_model * expand; }

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Observation/anticipation window and sampling budget for evaluation.
struct EvalConfig {
  double alpha = 0.2;
  double beta = 0.1;
  std::size_t samples = 25;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RunConfig {
  ModelConfig model;
  EvalConfig eval;
};

/// JSON with "model" and "eval" objects. Every field of each object must be
/// present and no unknown keys are accepted.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string to_json(const RunConfig& config, int indent = 2);

ModelConfig parse_model_config(const std::string& json_text);
std::string to_json(const ModelConfig& config, int indent = 2);

}  // namespace mixant
