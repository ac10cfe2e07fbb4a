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

#include "mixant/evaluate.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "mixant/metrics.hpp"
#include "mixant/trainer.hpp"

namespace mixant {

using nlohmann::json;

namespace {

ConditioningTensor conditioning_for(const Video& v, Window w) {
  const std::size_t nd = v.features.dim(1);
  Tensor observed({w.observed, nd});
  for (std::size_t t = 0; t < w.observed; ++t) {
    for (std::size_t d = 0; d < nd; ++d) observed.at(t, d) = v.features.at(t, d);
  }
  return build_conditioning(observed, w.future);
}

json report_json(const MoCReport& r) {
  json classes = json::array();
  for (const auto& a : r.class_accuracy) classes.push_back(a ? json(*a) : json(nullptr));
  json videos = json::array();
  for (const VideoResult& v : r.videos) {
    videos.push_back({{"id", v.id},
                      {"activity", v.activity},
                      {"observed", v.observed},
                      {"future", v.future},
                      {"mean_moc", v.mean_moc},
                      {"top1_moc", v.top1_moc},
                      {"best_sample", v.best_sample},
                      {"sample_moc", v.sample_moc}});
  }
  return {{"alpha", r.alpha},       {"beta", r.beta},
          {"samples", r.samples},   {"mean_moc", r.mean_moc},
          {"top1_moc", r.top1_moc}, {"class_accuracy", std::move(classes)},
          {"expert_usage", r.expert_usage}, {"videos", std::move(videos)}};
}

}  // namespace

SampleFn model_sampler(const MixAntModel& model) {
  const ModelConfig& cfg = model.config();
  auto schedule = std::make_shared<DiffusionSchedule>(cfg.diffusion_steps, cfg.beta_start, cfg.beta_end);
  return [&model, schedule](const Video&, const ConditioningTensor& cond, Rng& rng) {
    auto last = std::make_shared<std::vector<std::size_t>>();
    Denoiser denoise = [&model, last](const Tensor& noisy, const ConditioningTensor& c,
                                      std::size_t step) {
      MixAntModel::Prediction p = model.predict(noisy, c.features, c.observed, step);
      *last = std::move(p.selections);
      return std::move(p.scores);
    };
    SampleOutput out;
    out.scores = ddim_sample(denoise, cond, model.config().num_classes, *schedule,
                             model.config().ddim_steps, rng);
    out.selections = *last;
    return out;
  };
}

MoCReport evaluate(const SampleFn& sampler, const std::vector<const Video*>& videos,
                   const EvalConfig& eval, std::size_t num_classes) {
  eval.validate();
  if (videos.empty()) throw std::invalid_argument("evaluate: no videos");
  MoCReport report;
  report.alpha = eval.alpha;
  report.beta = eval.beta;
  report.samples = eval.samples;
  std::vector<double> class_correct(num_classes, 0.0), class_total(num_classes, 0.0);

  for (std::size_t i = 0; i < videos.size(); ++i) {
    const Video& v = *videos[i];
    const Window w = observation_window(v.length(), eval.alpha, eval.beta);
    const ConditioningTensor cond = conditioning_for(v, w);
    const std::vector<int> gt(v.labels.begin() + static_cast<std::ptrdiff_t>(w.observed),
                              v.labels.begin() + static_cast<std::ptrdiff_t>(w.observed + w.future));
    VideoResult vr;
    vr.id = v.id;
    vr.activity = v.activity;
    vr.observed = w.observed;
    vr.future = w.future;
    for (std::size_t s = 0; s < eval.samples; ++s) {
      Rng rng = Rng::derive(eval.seed, i, s);
      SampleOutput out = sampler(v, cond, rng);
      if (out.scores.rank() != 2 || out.scores.dim(0) != cond.length() ||
          out.scores.dim(1) != num_classes) {
        throw ShapeError("evaluate: sampler returned " + shape_string(out.scores.shape()));
      }
      const std::vector<int> all = argmax_rows(out.scores);
      const std::vector<int> pred(all.begin() + static_cast<std::ptrdiff_t>(w.observed), all.end());
      vr.sample_moc.push_back(moc(pred, gt));
      for (std::size_t t = 0; t < gt.size(); ++t) {
        const auto c = static_cast<std::size_t>(gt[t]);
        class_total[c] += 1.0;
        if (pred[t] == gt[t]) class_correct[c] += 1.0;
      }
      if (!out.selections.empty()) {
        if (report.expert_usage.empty()) report.expert_usage.resize(out.selections.size());
        for (std::size_t k = 0; k < out.selections.size(); ++k) {
          auto& row = report.expert_usage[k];
          if (row.size() <= out.selections[k]) row.resize(out.selections[k] + 1, 0.0);
          row[out.selections[k]] += 1.0;
        }
      }
    }
    double sum = 0.0;
    for (double m : vr.sample_moc) sum += m;
    vr.mean_moc = sum / static_cast<double>(vr.sample_moc.size());
    const auto best = std::max_element(vr.sample_moc.begin(), vr.sample_moc.end());
    vr.top1_moc = *best;
    vr.best_sample = static_cast<std::size_t>(best - vr.sample_moc.begin());
    report.mean_moc += vr.mean_moc;
    report.top1_moc += vr.top1_moc;
    report.videos.push_back(std::move(vr));
  }
  report.mean_moc /= static_cast<double>(videos.size());
  report.top1_moc /= static_cast<double>(videos.size());
  for (std::size_t c = 0; c < num_classes; ++c) {
    report.class_accuracy.push_back(class_total[c] > 0.0
                                        ? std::optional<double>(100.0 * class_correct[c] / class_total[c])
                                        : std::nullopt);
  }
  return report;
}

MoCReport evaluate(const MixAntModel& model, const std::vector<const Video*>& videos,
                   const EvalConfig& eval) {
  MoCReport r = evaluate(model_sampler(model), videos, eval, model.config().num_classes);
  const std::size_t E = model.config().num_experts;
  for (auto& row : r.expert_usage) row.resize(std::max(row.size(), E), 0.0);
  return r;
}

std::string to_json(const MoCReport& report, int indent) { return report_json(report).dump(indent); }

std::string to_json(const std::vector<MoCReport>& reports, int indent) {
  json arr = json::array();
  for (const MoCReport& r : reports) arr.push_back(report_json(r));
  return json{{"reports", std::move(arr)}}.dump(indent);
}

std::vector<SelectionRecord> collect_selections(const MixAntModel& model,
                                                const std::vector<const Video*>& videos,
                                                const EvalConfig& eval) {
  const SampleFn sampler = model_sampler(model);
  const std::size_t E = model.config().num_experts;
  std::vector<SelectionRecord> out;
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const Video& v = *videos[i];
    const ConditioningTensor cond =
        conditioning_for(v, observation_window(v.length(), eval.alpha, eval.beta));
    Rng rng = Rng::derive(eval.seed, i, 0);
    const SampleOutput s = sampler(v, cond, rng);
    out.push_back({v.id, v.activity, v.test, record_selection(s.selections, E).flatten()});
  }
  return out;
}

std::string selections_csv(const std::vector<SelectionRecord>& records) {
  std::ostringstream os;
  os << "sequence_id,activity_label,split";
  const std::size_t width = records.empty() ? 0 : records.front().flat.size();
  for (std::size_t j = 0; j < width; ++j) os << ",s" << j;
  os << "\n";
  for (const SelectionRecord& r : records) {
    os << r.id << "," << r.activity << "," << (r.test ? "test" : "train");
    for (int x : r.flat) os << "," << x;
    os << "\n";
  }
  return os.str();
}

}  // namespace mixant
