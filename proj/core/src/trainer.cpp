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

#include "mixant/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "mixant/ops.hpp"

namespace mixant {

namespace {

constexpr std::uint64_t kTrainStream = 0x747261696e;  // "train"

}  // namespace

Window observation_window(std::size_t n_frames, double alpha, double beta) {
  const auto P = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n_frames)));
  const auto F = static_cast<std::size_t>(std::floor(beta * static_cast<double>(n_frames)));
  if (P == 0 || F == 0 || P + F > n_frames) {
    std::ostringstream os;
    os << "a video of " << n_frames << " frames cannot hold the window alpha=" << alpha
       << " beta=" << beta << " (P=" << P << ", F=" << F << ")";
    throw std::invalid_argument(os.str());
  }
  return {P, F};
}

TrainingSample make_training_sample(const Video& video, Window window, std::size_t num_classes,
                                    const DiffusionSchedule& schedule, Rng& rng) {
  const std::size_t P = window.observed, L = window.observed + window.future;
  const std::size_t nd = video.features.dim(1);
  Tensor observed({P, nd});
  for (std::size_t t = 0; t < P; ++t) {
    for (std::size_t d = 0; d < nd; ++d) observed.at(t, d) = video.features.at(t, d);
  }
  TrainingSample s;
  s.observed = P;
  s.conditioning = build_conditioning(observed, window.future).features;
  s.target = one_hot(std::vector<int>(video.labels.begin(), video.labels.begin() + static_cast<std::ptrdiff_t>(L)),
                     num_classes);
  s.step = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(schedule.steps())));
  s.noisy = forward_diffuse(s.target, s.step, rng.normal_tensor({L, num_classes}), schedule);
  return s;
}

Trainer::Trainer(MixAntModel& model, const ModelConfig& config)
    : model_(model),
      lambda_(config.lambda_lb),
      optimizer_(model.parameters(),
                 AdamWOptions{config.learning_rate, config.adam_beta1, config.adam_beta2,
                              config.adam_eps, config.weight_decay}) {
  const std::size_t per_layer = config.router_mode == RouterMode::independent ? 2 : 1;
  gates_ = config.num_experts > 1 ? config.mixture_blocks() * per_layer : 0;
}

StepStats Trainer::step(std::span<const TrainingSample> batch) {
  if (batch.empty()) throw std::invalid_argument("Trainer::step: empty batch");
  const std::size_t E = model_.config().num_experts;
  const bool independent = model_.config().router_mode == RouterMode::independent;

  model_.parameters().zero_grad();
  Graph g;
  Var rec;
  std::vector<std::vector<Var>> gammas(gates_);
  StepStats stats;
  stats.soft_usage.assign(gates_, std::vector<double>(E, 0.0));
  stats.hard_usage.assign(gates_, std::vector<double>(E, 0.0));

  for (const TrainingSample& s : batch) {
    MixAntModel::Output out = model_.forward(g, s.noisy, s.conditioning, s.observed, s.step);
    Var l = ops::mse(out.scores, g.constant(s.target));
    rec = rec.valid() ? ops::add(rec, l) : l;
    if (gates_ == 0) continue;
    for (std::size_t k = 0; k < out.routes.size(); ++k) {
      const RouteDecision& r = out.routes[k];
      const std::size_t gf = independent ? 2 * k : k;
      gammas[gf].push_back(r.gamma_fwd);
      stats.hard_usage[gf][r.index_fwd] += 1.0;
      if (independent) {
        gammas[gf + 1].push_back(r.gamma_bwd);
        stats.hard_usage[gf + 1][r.index_bwd] += 1.0;
      }
    }
  }
  rec = ops::scale(rec, 1.0 / static_cast<double>(batch.size()));

  Var lb;
  if (gates_ > 0) {
    std::vector<Var> usage;
    for (std::size_t k = 0; k < gates_; ++k) {
      usage.push_back(accumulate_usage(gammas[k]));
      const Tensor& u = usage.back().value();
      for (std::size_t e = 0; e < E; ++e) stats.soft_usage[k][e] = u[e];
    }
    lb = load_balance_loss(usage);
  } else {
    lb = g.constant(Tensor::scalar(0.0));
  }
  Var total = total_loss(rec, lb, lambda_);
  stats.rec = rec.value().item();
  stats.lb = lb.value().item();
  stats.total = total.value().item();
  if (!std::isfinite(stats.total)) throw NumericError("non-finite training loss");
  g.backward(total);
  optimizer_.step();
  return stats;
}

TrainResult train(const ModelConfig& config, const Corpus& corpus, const EpochCallback& on_epoch) {
  config.validate();
  if (config.num_classes != corpus.grammar.num_classes ||
      config.feature_dim != corpus.grammar.feature_dim) {
    throw ConfigError("model num_classes/feature_dim do not match the corpus");
  }
  const std::vector<const Video*> videos = corpus.split(false);
  if (videos.empty()) throw std::invalid_argument("train: corpus has no training videos");

  TrainResult result;
  result.model = std::make_unique<MixAntModel>(config);
  Trainer trainer(*result.model, config);
  const DiffusionSchedule schedule(config.diffusion_steps, config.beta_start, config.beta_end);
  Rng rng = Rng::derive(config.seed, kTrainStream);

  std::vector<std::size_t> order(videos.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto pick = [&rng](const std::vector<double>& v) {
    return v[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(v.size()) - 1))];
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
    }
    EpochLog log;
    log.epoch = epoch;
    log.soft_usage.assign(trainer.gates(), std::vector<double>(config.num_experts, 0.0));
    log.hard_usage = log.soft_usage;
    std::size_t steps = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<TrainingSample> batch;
      for (std::size_t i = begin; i < end; ++i) {
        const Video& v = *videos[order[i]];
        const double alpha = pick(config.train_alphas);
        const double beta = pick(config.train_betas);
        batch.push_back(make_training_sample(v, observation_window(v.length(), alpha, beta),
                                             config.num_classes, schedule, rng));
      }
      StepStats s;
      try {
        s = trainer.step(batch);
      } catch (const NumericError& e) {
        std::ostringstream os;
        os << "training diverged at epoch " << epoch << ", step " << steps + 1 << ": " << e.what();
        throw TrainingDiverged(os.str());
      }
      log.rec += s.rec;
      log.lb += s.lb;
      log.total += s.total;
      for (std::size_t k = 0; k < trainer.gates(); ++k) {
        for (std::size_t e = 0; e < config.num_experts; ++e) {
          log.soft_usage[k][e] += s.soft_usage[k][e];
          log.hard_usage[k][e] += s.hard_usage[k][e];
        }
      }
      ++steps;
    }
    const double n = static_cast<double>(steps);
    log.rec /= n;
    log.lb /= n;
    log.total /= n;
    for (auto& row : log.soft_usage) {
      const double sum = std::accumulate(row.begin(), row.end(), 0.0);
      for (double& v : row) v /= sum;
    }
    if (on_epoch) on_epoch(log);
    result.log.push_back(std::move(log));
  }
  return result;
}

std::string to_json(const std::vector<EpochLog>& log, int indent) {
  nlohmann::json j = nlohmann::json::array();
  for (const EpochLog& e : log) {
    j.push_back({{"epoch", e.epoch},
                 {"rec", e.rec},
                 {"lb", e.lb},
                 {"total", e.total},
                 {"soft_usage", e.soft_usage},
                 {"hard_usage", e.hard_usage}});
  }
  return j.dump(indent);
}

GradCheckResult model_gradient_check(MixAntModel& model, std::size_t frames, std::size_t observed,
                                     std::uint64_t seed, std::size_t stride) {
  const ModelConfig& cfg = model.config();
  if (observed == 0 || observed > frames) {
    throw std::invalid_argument("model_gradient_check: need 1 <= observed <= frames");
  }
  Rng rng(seed);
  std::vector<int> labels(frames);
  for (int& l : labels) l = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.num_classes) - 1));
  const Tensor target = one_hot(labels, cfg.num_classes);
  const Tensor noisy = rng.normal_tensor({frames, cfg.num_classes});
  Tensor cond = rng.normal_tensor({frames, cfg.feature_dim});
  for (std::size_t t = observed; t < frames; ++t) {
    for (std::size_t d = 0; d < cfg.feature_dim; ++d) cond.at(t, d) = 0.0;
  }
  const std::size_t step = cfg.diffusion_steps / 2 + 1;
  const LossBuilder loss = [&](Graph& g) {
    MixAntModel::Output out = model.forward(g, noisy, cond, observed, step);
    Var rec = ops::mse(out.scores, g.constant(target));
    if (out.routes.empty() || cfg.num_experts < 2) return rec;
    std::vector<Var> usage;
    for (const RouteDecision& r : out.routes) {
      usage.push_back(accumulate_usage(std::span<const Var>(&r.gamma_fwd, 1)));
      if (cfg.router_mode == RouterMode::independent) {
        usage.push_back(accumulate_usage(std::span<const Var>(&r.gamma_bwd, 1)));
      }
    }
    return total_loss(rec, load_balance_loss(usage), cfg.lambda_lb);
  };
  return finite_difference_check(model.parameters(), loss, 1e-5, stride);
}

}  // namespace mixant
