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

// Runs every acceptance criterion and prints one PASS/FAIL line per
// criterion. Exit status is the number of failures.
//
// Usage: mixant_acceptance <acceptance.json> [criterion ...]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mixant/checkpoint.hpp"
#include "mixant/config.hpp"
#include "mixant/corpus.hpp"
#include "mixant/evaluate.hpp"
#include "mixant/metrics.hpp"
#include "mixant/ssm.hpp"
#include "mixant/trainer.hpp"

namespace {

using namespace mixant;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Shared state so the expensive training runs happen at most once.
struct Context {
  RunConfig desk;
  std::size_t corpus_videos = 200;
  std::uint64_t corpus_seed = 7;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  Corpus corpus;

  std::vector<std::unique_ptr<MixAntModel>> mixture;  // E = 5, one per seed
  std::vector<EpochLog> mixture_seed0_log;
  std::vector<MoCReport> mixture_reports;
  std::vector<MoCReport> baseline_reports;
  double mixture_seconds = 0.0;

  void log(const std::string& msg) const { std::cerr << "  .. " << msg << std::endl; }
};

ModelConfig desk_model(const Context& ctx, std::uint64_t seed) {
  ModelConfig c = ctx.desk.model;
  c.num_classes = ctx.corpus.grammar.num_classes;
  c.feature_dim = ctx.corpus.grammar.feature_dim;
  c.seed = seed;
  return c;
}

TrainResult timed_train(const Context& ctx, const ModelConfig& c, const std::string& what) {
  const auto t0 = Clock::now();
  TrainResult r = train(c, ctx.corpus);
  ctx.log(what + " trained in " + fmt("%.0f s", seconds_since(t0)) +
          ", final rec " + fmt("%.4f", r.log.back().rec));
  return r;
}

MoCReport timed_eval(const Context& ctx, const MixAntModel& m, const std::string& what) {
  const auto t0 = Clock::now();
  MoCReport r = evaluate(m, ctx.corpus.split(true), ctx.desk.eval);
  ctx.log(what + " evaluated in " + fmt("%.0f s", seconds_since(t0)) + ", top-1 " +
          fmt("%.2f", r.top1_moc) + ", mean " + fmt("%.2f", r.mean_moc));
  return r;
}

void ensure_mixture_runs(Context& ctx) {
  if (!ctx.mixture.empty()) return;
  const double cpu0 = cpu_seconds();
  for (std::uint64_t seed : ctx.seeds) {
    const ModelConfig c = desk_model(ctx, seed);
    TrainResult r = timed_train(ctx, c, "E=" + std::to_string(c.num_experts) + " seed " +
                                            std::to_string(seed));
    if (ctx.mixture.empty()) ctx.mixture_seed0_log = r.log;
    ctx.mixture_reports.push_back(timed_eval(ctx, *r.model, "mixture"));
    ctx.mixture.push_back(std::move(r.model));
  }
  ctx.mixture_seconds = cpu_seconds() - cpu0;
}

// ----------------------------------------------------------------------------

double series_exp(double z) {
  double term = 1.0, s = 1.0;
  for (int k = 1; k < 20; ++k) s += (term *= z / k);
  return s;
}

double series_phi(double z) {
  double term = 1.0, s = 1.0;
  for (int k = 1; k < 20; ++k) s += (term *= z / (k + 1));
  return s;
}

Verdict oracle_equivalence(Context&) {
  const auto t0 = Clock::now();
  Rng rng(101);
  const std::size_t T = 5, D = 3, N = 4;
  Tensor A = rng.uniform_tensor({D, N}, -2.0, -0.05);
  const Tensor B = rng.normal_tensor({T, N});
  const Tensor delta = rng.uniform_tensor({T, D}, 0.01, 0.8);
  const Discretized d = discretize(A, B, delta);
  double disc_err = 0.0;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t c = 0; c < D; ++c)
      for (std::size_t n = 0; n < N; ++n) {
        const double z = delta.at(t, c) * A.at(c, n);
        disc_err = std::max(disc_err, std::abs(d.decay.at(t, c, n) - series_exp(z)));
        disc_err = std::max(disc_err, std::abs(d.input.at(t, c, n) -
                                               series_phi(z) * delta.at(t, c) * B.at(t, n)));
      }

  double scan_err = 0.0;
  for (std::size_t L = 1; L <= 8; ++L) {
    const Tensor x = rng.normal_tensor({L, D}), C = rng.normal_tensor({L, N});
    const Tensor a = rng.uniform_tensor({L, D, N}, 0.05, 0.99), b = rng.normal_tensor({L, D, N});
    const Tensor y = selective_scan(x, a, b, C);
    for (std::size_t c = 0; c < D; ++c) {
      std::vector<double> h(N, 0.0);
      for (std::size_t t = 0; t < L; ++t) {
        double out = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
          h[n] = a.at(t, c, n) * h[n] + b.at(t, c, n) * x.at(t, c);
          out += C.at(t, n) * h[n];
        }
        scan_err = std::max(scan_err, std::abs(y.at(t, c) - out));
      }
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "discretize err " << disc_err << " (<= 1e-10), scan err " << scan_err
     << " (<= 1e-12), " << secs << " s (< 1 s)";
  return {disc_err <= 1e-10 && scan_err <= 1e-12 && secs < 1.0, os.str()};
}

Verdict gradient_fidelity(Context&) {
  const auto t0 = Clock::now();
  ModelConfig c;
  c.num_classes = 4;
  c.feature_dim = 3;
  c.d_model = 8;
  c.d_state = 4;
  c.num_blocks = 1;
  c.static_blocks = 0;
  c.num_experts = 2;
  c.diffusion_steps = 100;
  c.ddim_steps = 10;
  MixAntModel m(c);
  const GradCheckResult r = model_gradient_check(m, 8, 3, 11);
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "max rel err " << r.max_rel_error << " over " << r.checked << " entries (<= 1e-4), worst "
     << r.worst_parameter << ", " << secs << " s (< 120 s)";
  return {r.max_rel_error <= 1e-4 && r.checked > 0 && secs < 120.0, os.str()};
}

Verdict reduction_identity(Context& ctx) {
  ModelConfig mix = desk_model(ctx, 3);
  mix.num_experts = 1;
  ModelConfig stack = mix;
  stack.static_blocks = stack.num_blocks;
  const MixAntModel a(mix), b(stack);
  bool equal = true;
  const Video& v = ctx.corpus.videos.front();
  for (std::uint64_t s = 0; s < 3; ++s) {
    Rng rng(s);
    const std::size_t L = v.length(), P = L / 3;
    Tensor cond = v.features;
    for (std::size_t t = P; t < L; ++t)
      for (std::size_t d = 0; d < cond.cols(); ++d) cond.at(t, d) = 0.0;
    const Tensor noisy = rng.normal_tensor({L, mix.num_classes});
    const std::size_t step = 1 + s * 300;
    equal = equal && a.predict(noisy, cond, P, step).scores == b.predict(noisy, cond, P, step).scores;
  }

  ModelConfig all_static = desk_model(ctx, 3);
  all_static.static_blocks = all_static.num_blocks;
  const MixAntModel s(all_static);
  bool no_router = true;
  for (const Parameter& p : s.parameters()) {
    no_router = no_router && p.name.find("router") == std::string::npos &&
                p.name.find("bank") == std::string::npos;
  }
  Graph g;
  const Video& w = ctx.corpus.videos.back();
  Rng rng(9);
  no_router = no_router &&
              s.forward(g, rng.normal_tensor({w.length(), all_static.num_classes}), w.features,
                        w.length(), 5)
                  .routes.empty();
  std::ostringstream os;
  os << "E=1 vs static stack bit-exact: " << (equal ? "yes" : "no")
     << "; K0=K has no router: " << (no_router ? "yes" : "no");
  return {equal && no_router, os.str()};
}

Verdict load_balancing(Context& ctx) {
  const double kl_u = kl_to_uniform(std::vector<double>{4, 4, 4, 4, 4});
  const double kl_2 = kl_to_uniform(std::vector<double>{1, 0});
  ensure_mixture_runs(ctx);
  const double with_lb = usage_kl(ctx.mixture_seed0_log.back().hard_usage);
  ModelConfig c = desk_model(ctx, ctx.seeds.front());
  c.lambda_lb = 0.0;
  const TrainResult r = timed_train(ctx, c, "lambda=0 seed " + std::to_string(c.seed));
  const double without_lb = usage_kl(r.log.back().hard_usage);
  std::ostringstream os;
  os << "KL(uniform) " << kl_u << ", KL((1,0)) - ln2 " << kl_2 - std::log(2.0)
     << "; hard-usage KL lambda=0.15 " << with_lb << " vs lambda=0 " << without_lb;
  return {kl_u == 0.0 && std::abs(kl_2 - std::log(2.0)) <= 1e-12 && with_lb < without_lb,
          os.str()};
}

Verdict anticipation_trend(Context& ctx) {
  ensure_mixture_runs(ctx);
  const double cpu0 = cpu_seconds();
  for (std::uint64_t seed : ctx.seeds) {
    ModelConfig c = desk_model(ctx, seed);
    c.num_experts = 1;
    const TrainResult r = timed_train(ctx, c, "E=1 seed " + std::to_string(seed));
    ctx.baseline_reports.push_back(timed_eval(ctx, *r.model, "baseline"));
  }
  const double baseline_seconds = cpu_seconds() - cpu0;
  double mix = 0.0, base = 0.0;
  for (std::size_t i = 0; i < ctx.seeds.size(); ++i) {
    mix += ctx.mixture_reports[i].top1_moc / static_cast<double>(ctx.seeds.size());
    base += ctx.baseline_reports[i].top1_moc / static_cast<double>(ctx.seeds.size());
  }
  const double per_config = std::max(ctx.mixture_seconds, baseline_seconds);
  std::ostringstream os;
  os << "top-1 MoC E=" << ctx.desk.model.num_experts << " " << mix << " vs E=1 " << base
     << " (margin " << mix - base << ", need >= 2); slowest configuration "
     << per_config / 60.0 << " CPU-min over " << ctx.seeds.size() << " seeds (< 30)";
  return {mix - base >= 2.0 && per_config < 1800.0, os.str()};
}

std::vector<std::vector<double>> as_features(const std::vector<SelectionRecord>& rs) {
  std::vector<std::vector<double>> out;
  for (const SelectionRecord& r : rs) out.emplace_back(r.flat.begin(), r.flat.end());
  return out;
}

std::vector<int> as_labels(const std::vector<SelectionRecord>& rs) {
  std::vector<int> out;
  for (const SelectionRecord& r : rs) out.push_back(r.activity);
  return out;
}

Verdict router_context(Context& ctx) {
  ensure_mixture_runs(ctx);
  const MixAntModel& m = *ctx.mixture.front();
  const auto train_sel = collect_selections(m, ctx.corpus.split(false), ctx.desk.eval);
  const auto test_sel = collect_selections(m, ctx.corpus.split(true), ctx.desk.eval);
  const std::size_t n_act = ctx.corpus.grammar.activities.size();
  const double acc = nearest_centroid_accuracy(as_features(train_sel), as_labels(train_sel),
                                               as_features(test_sel), as_labels(test_sel), n_act);
  const double chance = 1.0 / static_cast<double>(n_act);
  std::set<std::vector<int>> patterns;
  for (const auto& r : test_sel) patterns.insert(r.flat);
  std::ostringstream os;
  os << "held-out accuracy " << acc << " vs chance " << chance << " (need >= chance + 0.15); "
     << patterns.size() << " distinct selection patterns on " << test_sel.size() << " videos";
  return {acc >= chance + 0.15, os.str()};
}

Verdict protocol_sanity(Context& ctx) {
  ensure_mixture_runs(ctx);
  bool ordered = true;
  for (const MoCReport& r : ctx.mixture_reports) {
    ordered = ordered && r.mean_moc <= r.top1_moc;
    for (const VideoResult& v : r.videos) ordered = ordered && v.mean_moc <= v.top1_moc;
  }
  const auto test = ctx.corpus.split(true);
  EvalConfig one = ctx.desk.eval;
  one.samples = 1;
  const MoCReport single = evaluate(*ctx.mixture.front(), test, one);
  bool equal = single.mean_moc == single.top1_moc;
  for (const VideoResult& v : single.videos) equal = equal && v.mean_moc == v.top1_moc;

  const std::size_t n_c = ctx.corpus.grammar.num_classes;
  const auto truth = [](const Video& v, std::size_t L) {
    return std::vector<int>(v.labels.begin(), v.labels.begin() + static_cast<long>(L));
  };
  const SampleFn oracle = [&](const Video& v, const ConditioningTensor& c, Rng&) {
    return SampleOutput{one_hot(truth(v, c.length()), n_c), {}};
  };
  const MoCReport perfect = evaluate(oracle, test, ctx.desk.eval, n_c);
  const SampleFn scrambled_past = [&](const Video& v, const ConditioningTensor& c, Rng& rng) {
    std::vector<int> lab = truth(v, c.length());
    for (std::size_t t = 0; t < c.observed; ++t)
      lab[t] = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(n_c) - 1));
    return SampleOutput{one_hot(lab, n_c), {}};
  };
  const MoCReport invariant = evaluate(scrambled_past, test, ctx.desk.eval, n_c);

  // Perturbing observed rows of real model samples must not move any score.
  const SampleFn model = model_sampler(*ctx.mixture.front());
  const SampleFn perturbed = [&](const Video& v, const ConditioningTensor& c, Rng& rng) {
    SampleOutput out = model(v, c, rng);
    for (std::size_t t = 0; t < c.observed; ++t)
      for (std::size_t k = 0; k < n_c; ++k) out.scores.at(t, k) = std::sin(double(t * 7 + k));
    return out;
  };
  EvalConfig few = ctx.desk.eval;
  few.samples = 3;
  const bool model_invariant =
      to_json(evaluate(model, test, few, n_c)) == to_json(evaluate(perturbed, test, few, n_c));

  std::ostringstream os;
  os << "mean <= top-1 on every video: " << (ordered ? "yes" : "no")
     << "; S=1 equality: " << (equal ? "yes" : "no") << "; oracle " << perfect.mean_moc << "/"
     << perfect.top1_moc << "; observed-frame invariance: "
     << (invariant.top1_moc == 100.0 && model_invariant ? "yes" : "no");
  return {ordered && equal && perfect.mean_moc == 100.0 && perfect.top1_moc == 100.0 &&
              invariant.top1_moc == 100.0 && invariant.mean_moc == 100.0 && model_invariant,
          os.str()};
}

Verdict determinism(Context& ctx) {
  // Train, checkpoint, reload and evaluate, twice.
  const Corpus small = generate_corpus(ctx.corpus.grammar, 40, ctx.corpus_seed + 1);
  ModelConfig c = desk_model(ctx, 21);
  c.epochs = 3;
  EvalConfig e = ctx.desk.eval;
  e.samples = 5;
  const auto run = [&](const std::string& tag) {
    const TrainResult r = train(c, small);
    const auto dir = std::filesystem::temp_directory_path() / ("mixant_acceptance_" + tag);
    std::filesystem::remove_all(dir);
    save_checkpoint(dir, *r.model);
    const Checkpoint ck = load_checkpoint(dir);
    std::filesystem::remove_all(dir);
    return to_json(evaluate(*ck.model, small.split(true), e));
  };
  const std::string a = run("a"), b = run("b");
  std::ostringstream os;
  os << "report bytes " << a.size() << " vs " << b.size() << ", identical: "
     << (a == b ? "yes" : "no");
  return {a == b && !a.empty(), os.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict(Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: mixant_acceptance <acceptance.json> [criterion ...]\n";
    return 2;
  }
  Context ctx;
  try {
    ctx.desk = load_run_config(argv[1]);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  ctx.corpus = generate_corpus(ActivityGrammar::breakfast_like(), ctx.corpus_videos, ctx.corpus_seed);

  const std::vector<Criterion> all{
      {1, "oracle-equivalence", oracle_equivalence},
      {2, "gradient-fidelity", gradient_fidelity},
      {3, "reduction-identity", reduction_identity},
      {4, "load-balancing", load_balancing},
      {5, "anticipation-trend", anticipation_trend},
      {6, "router-context", router_context},
      {7, "protocol-sanity", protocol_sanity},
      {8, "determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 2; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Verdict v;
    try {
      v = c.run(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << v.detail
              << std::endl;
  }
  return failures;
}
