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

#include <functional>
#include <string>
#include <vector>

#include "mixant/config.hpp"
#include "mixant/corpus.hpp"

namespace mixant {

enum class AblationAxis { experts, static_blocks, router, lambda };

/// Accepts "experts", "static", "router" and "lambda".
AblationAxis parse_ablation_axis(const std::string& s);
std::string to_string(AblationAxis axis);

/// Returns `base` with the axis set to `value`. Throws ConfigError if the
/// value does not parse or yields an invalid configuration.
ModelConfig apply_ablation_value(const ModelConfig& base, AblationAxis axis,
                                 const std::string& value);

struct AblationRow {
  std::string axis;
  std::string value;
  double top1_moc = 0.0;
  double mean_moc = 0.0;
  double usage_kl = 0.0;  // hard usage of the final training epoch
  double final_rec_loss = 0.0;
};

using AblationProgress = std::function<void(const AblationRow&)>;

/// Trains one model per value on the training split and evaluates it on
/// the test split with `base.eval`.
std::vector<AblationRow> run_ablation(const RunConfig& base, const Corpus& corpus,
                                      AblationAxis axis, const std::vector<std::string>& values,
                                      const AblationProgress& progress = {});

/// Header "axis,value,top1_moc,mean_moc,usage_kl,final_rec_loss".
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace mixant
