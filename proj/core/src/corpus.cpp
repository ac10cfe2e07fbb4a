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

#include "mixant/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mixant/rng.hpp"
#include "mixant/tensor_io.hpp"

namespace mixant {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kEmbeddingStream = 0x656d626564;  // "embed"
constexpr std::uint64_t kSplitStream = 0x73706c6974;      // "split"
constexpr std::uint64_t kVideoStream = 0x766964656f;      // "video"

[[noreturn]] void bad(const std::string& what) {
  throw std::invalid_argument("invalid grammar: " + what);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits `total` frames over the kept segments proportionally to their raw
// durations (largest remainder), giving every segment at least one frame.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& raw, std::size_t total) {
  const double sum = static_cast<double>(std::accumulate(raw.begin(), raw.end(), std::size_t{0}));
  std::vector<std::size_t> out(raw.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double exact = static_cast<double>(raw[i]) * static_cast<double>(total) / sum;
    out[i] = static_cast<std::size_t>(std::floor(exact));
    used += out[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total; ++k, ++used) ++out[rem[k % rem.size()].second];
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] > 0) continue;
    const auto donor = std::max_element(out.begin(), out.end());
    --*donor;
    out[i] = 1;
  }
  return out;
}

}  // namespace

void ActivityGrammar::validate() const {
  if (activities.empty()) bad("no activities");
  if (num_classes < 2) bad("num_classes must be at least 2");
  if (feature_dim == 0) bad("feature_dim must be positive");
  if (!(feature_noise >= 0.0)) bad("feature_noise must be non-negative");
  if (!(activity_feature_scale >= 0.0)) bad("activity_feature_scale must be non-negative");
  if (min_frames == 0 || min_frames > max_frames) bad("frame range is empty");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) bad("test_fraction must lie in [0, 1)");
  std::map<int, std::set<std::size_t>> users;
  for (std::size_t a = 0; a < activities.size(); ++a) {
    const ActivitySpec& act = activities[a];
    if (act.segments.empty()) bad("activity '" + act.name + "' has no segments");
    if (act.segments.size() > min_frames) bad("activity '" + act.name + "' cannot fit min_frames");
    std::set<int> distinct;
    for (const SegmentSpec& s : act.segments) {
      if (s.action < 0 || static_cast<std::size_t>(s.action) >= num_classes) {
        bad("activity '" + act.name + "' uses an out-of-range class");
      }
      if (s.min_len == 0 || s.min_len > s.max_len) {
        bad("activity '" + act.name + "' has an empty duration range");
      }
      if (!(s.prob > 0.0 && s.prob <= 1.0)) bad("segment probability must lie in (0, 1]");
      distinct.insert(s.action);
      users[s.action].insert(a);
    }
    if (distinct.size() < 3) bad("activity '" + act.name + "' uses fewer than 3 distinct classes");
  }
  const bool shared = std::any_of(users.begin(), users.end(),
                                  [](const auto& kv) { return kv.second.size() >= 2; });
  if (!shared) bad("no class is shared between two activities");
}

ActivityGrammar ActivityGrammar::breakfast_like() {
  // Classes: 0 take_bowl, 1 pour_milk, 2 pour_cereal, 3 stir, 4 crack_egg,
  // 5 fry, 6 cut_bread, 7 spread.
  ActivityGrammar g;
  g.activities = {
      {"cereal", {{0, 20, 30, 1.0}, {2, 15, 30, 1.0}, {1, 10, 25, 1.0}, {3, 5, 20, 0.6}}},
      {"scrambled_egg", {{4, 20, 30, 1.0}, {3, 15, 25, 1.0}, {5, 20, 40, 1.0}, {0, 5, 10, 0.7}}},
      {"sandwich", {{6, 20, 30, 1.0}, {7, 15, 30, 1.0}, {0, 5, 15, 0.8}, {3, 5, 10, 0.4}}},
      {"coffee", {{1, 20, 30, 1.0}, {5, 15, 30, 1.0}, {7, 10, 20, 0.6}, {2, 5, 15, 1.0}}},
  };
  return g;
}

ActivityGrammar parse_grammar(const std::string& json_text) {
  ActivityGrammar g;
  try {
    const json j = json::parse(json_text);
    g.num_classes = j.at("num_classes").get<std::size_t>();
    g.feature_dim = j.at("feature_dim").get<std::size_t>();
    g.feature_noise = j.at("feature_noise").get<double>();
    g.activity_feature_scale = j.value("activity_feature_scale", 0.0);
    g.min_frames = j.at("min_frames").get<std::size_t>();
    g.max_frames = j.at("max_frames").get<std::size_t>();
    g.test_fraction = j.value("test_fraction", 0.2);
    for (const auto& a : j.at("activities")) {
      ActivitySpec act;
      act.name = a.at("name").get<std::string>();
      for (const auto& s : a.at("segments")) {
        act.segments.push_back({s.at("action").get<int>(), s.at("min_len").get<std::size_t>(),
                                s.at("max_len").get<std::size_t>(), s.value("prob", 1.0)});
      }
      g.activities.push_back(std::move(act));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("grammar JSON: ") + e.what());
  }
  g.validate();
  return g;
}

ActivityGrammar load_grammar(const fs::path& path) { return parse_grammar(read_file(path)); }

std::string to_json(const ActivityGrammar& g, int indent) {
  json acts = json::array();
  for (const ActivitySpec& a : g.activities) {
    json segs = json::array();
    for (const SegmentSpec& s : a.segments) {
      segs.push_back(
          {{"action", s.action}, {"min_len", s.min_len}, {"max_len", s.max_len}, {"prob", s.prob}});
    }
    acts.push_back({{"name", a.name}, {"segments", std::move(segs)}});
  }
  json j = {{"num_classes", g.num_classes},
            {"feature_dim", g.feature_dim},
            {"feature_noise", g.feature_noise},
            {"activity_feature_scale", g.activity_feature_scale},
            {"min_frames", g.min_frames},
            {"max_frames", g.max_frames},
            {"test_fraction", g.test_fraction},
            {"activities", std::move(acts)}};
  return j.dump(indent);
}

std::vector<const Video*> Corpus::split(bool test) const {
  std::vector<const Video*> out;
  for (const Video& v : videos) {
    if (v.test == test) out.push_back(&v);
  }
  return out;
}

Corpus generate_corpus(const ActivityGrammar& grammar, std::size_t n_videos, std::uint64_t seed) {
  grammar.validate();
  if (n_videos == 0) throw std::invalid_argument("generate_corpus: n_videos must be positive");
  const std::size_t nd = grammar.feature_dim;

  Rng embed_rng = Rng::derive(seed, kEmbeddingStream);
  const Tensor class_embed = embed_rng.normal_tensor({grammar.num_classes, nd});
  const Tensor activity_embed = embed_rng.normal_tensor({grammar.activities.size(), nd});

  Corpus corpus;
  corpus.grammar = grammar;
  corpus.seed = seed;
  corpus.videos.resize(n_videos);

  for (std::size_t i = 0; i < n_videos; ++i) {
    Video& v = corpus.videos[i];
    Rng rng = Rng::derive(seed, kVideoStream, i);
    v.activity = static_cast<int>(i % grammar.activities.size());
    const ActivitySpec& act = grammar.activities[static_cast<std::size_t>(v.activity)];

    std::vector<int> actions;
    std::vector<std::size_t> raw;
    for (const SegmentSpec& s : act.segments) {
      const bool keep = s.prob >= 1.0 || rng.bernoulli(s.prob);
      const auto len = static_cast<std::size_t>(rng.uniform_int(
          static_cast<std::int64_t>(s.min_len), static_cast<std::int64_t>(s.max_len)));
      if (!keep) continue;
      actions.push_back(s.action);
      raw.push_back(len);
    }
    if (actions.empty()) {
      actions.push_back(act.segments.front().action);
      raw.push_back(act.segments.front().min_len);
    }
    const auto n_v = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(grammar.min_frames),
                        static_cast<std::int64_t>(grammar.max_frames)));
    const std::vector<std::size_t> lens = apportion(raw, n_v);

    v.labels.reserve(n_v);
    for (std::size_t s = 0; s < actions.size(); ++s) v.labels.insert(v.labels.end(), lens[s], actions[s]);

    v.features = Tensor({n_v, nd});
    for (std::size_t t = 0; t < n_v; ++t) {
      const auto c = static_cast<std::size_t>(v.labels[t]);
      for (std::size_t d = 0; d < nd; ++d) {
        v.features.at(t, d) = class_embed.at(c, d) +
                              grammar.activity_feature_scale *
                                  activity_embed.at(static_cast<std::size_t>(v.activity), d) +
                              grammar.feature_noise * rng.normal();
      }
    }
    v.id = "video_" + std::to_string(i);
  }

  std::vector<std::size_t> order(n_videos);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng = Rng::derive(seed, kSplitStream);
  for (std::size_t i = n_videos; i > 1; --i) {
    const auto j = static_cast<std::size_t>(split_rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
    std::swap(order[i - 1], order[j]);
  }
  const auto n_test = static_cast<std::size_t>(
      std::llround(grammar.test_fraction * static_cast<double>(n_videos)));
  for (std::size_t k = 0; k < n_test; ++k) corpus.videos[order[k]].test = true;
  return corpus;
}

std::vector<int> transcript(const std::vector<int>& labels) {
  std::vector<int> out;
  for (int l : labels) {
    if (out.empty() || out.back() != l) out.push_back(l);
  }
  return out;
}

void save_corpus(const fs::path& dir, const Corpus& corpus) {
  fs::create_directories(dir / "features");
  json videos = json::array();
  for (const Video& v : corpus.videos) {
    const std::string file = "features/" + v.id + ".mxt";
    save_tensor(dir / file, v.features, DType::f64);
    videos.push_back({{"id", v.id},
                      {"activity", v.activity},
                      {"test", v.test},
                      {"labels", v.labels},
                      {"features", file}});
  }
  json j = {{"format", "mixant-corpus-v1"},
            {"seed", corpus.seed},
            {"grammar", json::parse(to_json(corpus.grammar))},
            {"videos", std::move(videos)}};
  std::ofstream out(dir / "corpus.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "corpus.json").string());
  out << j.dump(1) << "\n";
}

Corpus load_corpus(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_file(dir / "corpus.json"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("corpus.json: ") + e.what());
  }
  if (j.value("format", "") != "mixant-corpus-v1") {
    throw FormatError("unsupported corpus format in " + dir.string());
  }
  Corpus c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.grammar = parse_grammar(j.at("grammar").dump());
  for (const auto& jv : j.at("videos")) {
    Video v;
    v.id = jv.at("id").get<std::string>();
    v.activity = jv.at("activity").get<int>();
    v.test = jv.at("test").get<bool>();
    v.labels = jv.at("labels").get<std::vector<int>>();
    v.features = load_tensor(dir / jv.at("features").get<std::string>());
    if (v.features.rank() != 2 || v.features.dim(0) != v.labels.size() ||
        v.features.dim(1) != c.grammar.feature_dim) {
      throw FormatError("video " + v.id + " has features of shape " +
                        shape_string(v.features.shape()));
    }
    c.videos.push_back(std::move(v));
  }
  return c;
}

}  // namespace mixant
