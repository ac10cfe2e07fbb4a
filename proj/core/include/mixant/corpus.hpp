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
#include <string>
#include <vector>

#include "mixant/tensor.hpp"

namespace mixant {

// Synthetic procedural-activity videos.
//
// An activity is an ordered script of atomic actions. Each generated video
// walks one script: every segment is kept with its probability, gets a raw
// duration from its range, and the kept durations are rescaled to a video
// length drawn from [min_frames, max_frames]. A frame's feature is the
// class embedding, plus a scaled activity embedding, plus Gaussian noise.

struct SegmentSpec {
  int action = 0;
  std::size_t min_len = 1;
  std::size_t max_len = 1;
  double prob = 1.0;
};

struct ActivitySpec {
  std::string name;
  std::vector<SegmentSpec> segments;
};

struct ActivityGrammar {
  std::size_t num_classes = 8;
  std::size_t feature_dim = 16;
  double feature_noise = 0.5;
  double activity_feature_scale = 0.0;
  std::size_t min_frames = 60;
  std::size_t max_frames = 120;
  double test_fraction = 0.2;
  std::vector<ActivitySpec> activities;

  /// Throws std::invalid_argument naming the broken constraint.
  void validate() const;

  /// Four kitchen-style activities over eight shared action classes.
  static ActivityGrammar breakfast_like();
};

ActivityGrammar parse_grammar(const std::string& json_text);
ActivityGrammar load_grammar(const std::filesystem::path& path);
std::string to_json(const ActivityGrammar& grammar, int indent = 2);

struct Video {
  std::string id;
  int activity = 0;
  std::vector<int> labels;  // one per frame
  Tensor features;          // [n_v, n_d]
  bool test = false;

  std::size_t length() const noexcept { return labels.size(); }
};

struct Corpus {
  ActivityGrammar grammar;
  std::uint64_t seed = 0;
  std::vector<Video> videos;

  std::vector<const Video*> split(bool test) const;
};

/// Deterministic under `seed`. Throws std::invalid_argument for an invalid
/// grammar or n_videos == 0.
Corpus generate_corpus(const ActivityGrammar& grammar, std::size_t n_videos, std::uint64_t seed);

/// Collapses per-frame labels to the ordered list of segment actions.
std::vector<int> transcript(const std::vector<int>& labels);

/// corpus.json plus features/<id>.mxt per video.
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace mixant
