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
#include <span>
#include <vector>

namespace mixant {

/// Mean over classes of per-class frame accuracy, in percent. Only classes
/// present in `gt` contribute. Throws std::invalid_argument on empty or
/// mismatched inputs.
double moc(std::span<const int> pred, std::span<const int> gt);

/// KL(p || Uniform) for a non-negative histogram, normalized first.
/// Returns 0 for an all-zero histogram.
double kl_to_uniform(std::span<const double> histogram);

/// Sum of kl_to_uniform over the rows of a per-layer usage table.
double usage_kl(const std::vector<std::vector<double>>& per_layer);

/// Classifies each query by its nearest class centroid (squared Euclidean,
/// ties to the lowest label) and returns the fraction classified correctly.
/// Labels are 0..n_labels-1; classes without training points never win.
double nearest_centroid_accuracy(const std::vector<std::vector<double>>& train_x,
                                 const std::vector<int>& train_y,
                                 const std::vector<std::vector<double>>& query_x,
                                 const std::vector<int>& query_y, std::size_t n_labels);

}  // namespace mixant
