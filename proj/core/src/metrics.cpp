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

#include "mixant/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace mixant {

double moc(std::span<const int> pred, std::span<const int> gt) {
  if (gt.empty()) throw std::invalid_argument("moc: empty evaluation window");
  if (pred.size() != gt.size()) throw std::invalid_argument("moc: length mismatch");
  std::map<int, std::pair<std::size_t, std::size_t>> tally;  // correct, total
  for (std::size_t i = 0; i < gt.size(); ++i) {
    auto& [correct, total] = tally[gt[i]];
    ++total;
    if (pred[i] == gt[i]) ++correct;
  }
  double sum = 0.0;
  for (const auto& [cls, ct] : tally) {
    sum += static_cast<double>(ct.first) / static_cast<double>(ct.second);
  }
  return 100.0 * sum / static_cast<double>(tally.size());
}

double kl_to_uniform(std::span<const double> histogram) {
  double total = 0.0;
  for (double h : histogram) {
    if (!(h >= 0.0)) throw std::invalid_argument("kl_to_uniform: negative histogram entry");
    total += h;
  }
  if (total == 0.0) return 0.0;
  const double n = static_cast<double>(histogram.size());
  double kl = 0.0;
  for (double h : histogram) {
    const double p = h / total;
    if (p > 0.0) kl += p * std::log(p * n);
  }
  return kl;
}

double usage_kl(const std::vector<std::vector<double>>& per_layer) {
  double s = 0.0;
  for (const auto& row : per_layer) s += kl_to_uniform(row);
  return s;
}

double nearest_centroid_accuracy(const std::vector<std::vector<double>>& train_x,
                                 const std::vector<int>& train_y,
                                 const std::vector<std::vector<double>>& query_x,
                                 const std::vector<int>& query_y, std::size_t n_labels) {
  if (train_x.size() != train_y.size() || query_x.size() != query_y.size()) {
    throw std::invalid_argument("nearest_centroid_accuracy: feature/label count mismatch");
  }
  if (train_x.empty() || query_x.empty()) {
    throw std::invalid_argument("nearest_centroid_accuracy: empty set");
  }
  const std::size_t dim = train_x.front().size();
  std::vector<std::vector<double>> centroid(n_labels, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> count(n_labels, 0);
  for (std::size_t i = 0; i < train_x.size(); ++i) {
    const auto y = static_cast<std::size_t>(train_y[i]);
    if (y >= n_labels || train_x[i].size() != dim) {
      throw std::invalid_argument("nearest_centroid_accuracy: bad training point");
    }
    for (std::size_t d = 0; d < dim; ++d) centroid[y][d] += train_x[i][d];
    ++count[y];
  }
  for (std::size_t c = 0; c < n_labels; ++c) {
    for (double& v : centroid[c]) v /= count[c] ? static_cast<double>(count[c]) : 1.0;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < query_x.size(); ++i) {
    if (query_x[i].size() != dim) throw std::invalid_argument("nearest_centroid_accuracy: bad query");
    double best = std::numeric_limits<double>::infinity();
    int best_label = -1;
    for (std::size_t c = 0; c < n_labels; ++c) {
      if (count[c] == 0) continue;
      double d2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = query_x[i][d] - centroid[c][d];
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        best_label = static_cast<int>(c);
      }
    }
    if (best_label == query_y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(query_x.size());
}

}  // namespace mixant
