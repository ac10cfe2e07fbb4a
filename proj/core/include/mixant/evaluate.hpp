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
#include <optional>
#include <string>
#include <vector>

#include "mixant/config.hpp"
#include "mixant/corpus.hpp"
#include "mixant/diffusion.hpp"
#include "mixant/model.hpp"
#include "mixant/rng.hpp"

namespace mixant {

struct SampleOutput {
  Tensor scores;                        // [P+F, n_c]
  std::vector<std::size_t> selections;  // expert per mixture block, may be empty
};

/// Produces one anticipation sample for a video from its conditioning.
using SampleFn =
    std::function<SampleOutput(const Video& video, const ConditioningTensor& cond, Rng& rng)>;

/// DDIM sampling with the model. Selections are those of the final step.
SampleFn model_sampler(const MixAntModel& model);

struct VideoResult {
  std::string id;
  int activity = 0;
  std::size_t observed = 0;
  std::size_t future = 0;
  std::vector<double> sample_moc;
  double mean_moc = 0.0;
  double top1_moc = 0.0;
  std::size_t best_sample = 0;
};

struct MoCReport {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t samples = 0;
  double mean_moc = 0.0;  // averaged over videos
  double top1_moc = 0.0;
  /// Frame accuracy per class over every sample's future window, empty
  /// where the class never occurs in a ground-truth future.
  std::vector<std::optional<double>> class_accuracy;
  /// [mixture block][expert] selection counts over every sample.
  std::vector<std::vector<double>> expert_usage;
  std::vector<VideoResult> videos;
};

/// Runs `samples` draws per video; sample s of video i uses
/// Rng::derive(eval.seed, i, s). Only the F future frames are scored.
MoCReport evaluate(const SampleFn& sampler, const std::vector<const Video*>& videos,
                   const EvalConfig& eval, std::size_t num_classes);

MoCReport evaluate(const MixAntModel& model, const std::vector<const Video*>& videos,
                   const EvalConfig& eval);

std::string to_json(const MoCReport& report, int indent = 2);
std::string to_json(const std::vector<MoCReport>& reports, int indent = 2);

/// Flattened selection matrix of sample 0 for each video.
struct SelectionRecord {
  std::string id;
  int activity = 0;
  bool test = false;
  std::vector<int> flat;  // K_E * E entries
};

std::vector<SelectionRecord> collect_selections(const MixAntModel& model,
                                                const std::vector<const Video*>& videos,
                                                const EvalConfig& eval);

/// Header "sequence_id,activity_label,split,s0,...".
std::string selections_csv(const std::vector<SelectionRecord>& records);

}  // namespace mixant
