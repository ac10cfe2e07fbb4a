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

// mixant: data generation, training, evaluation and analysis front end.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mixant/ablation.hpp"
#include "mixant/checkpoint.hpp"
#include "mixant/corpus.hpp"
#include "mixant/evaluate.hpp"
#include "mixant/trainer.hpp"

namespace fs = std::filesystem;
using namespace mixant;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty()) throw CLI::ValidationError("empty value list");
  return out;
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split_list(s)) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw CLI::ValidationError("not a number: " + item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MixANT dense action anticipation"};
  app.require_subcommand(1);

  std::string grammar_path, out_dir, config_path, data_dir, ckpt_dir, out_path;
  std::size_t n_videos = 200, samples = 25, frames = 8, observed = 3, stride = 1;
  std::uint64_t seed = 7, eval_seed = 0;
  std::string alphas = "0.2", betas = "0.1", axis, values;
  double tolerance = 1e-4;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic activity corpus");
  gen->add_option("--grammar", grammar_path, "Grammar JSON (built-in grammar if omitted)");
  gen->add_option("--n", n_videos, "Number of videos");
  gen->add_option("--seed", seed, "Corpus seed");
  gen->add_option("--out", out_dir, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train a model on a corpus");
  tr->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--data", data_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--out", out_dir, "Checkpoint directory")->required();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  ev->add_option("--ckpt", ckpt_dir, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--data", data_dir, "Corpus directory (defaults to the training corpus)");
  ev->add_option("--alpha", alphas, "Observation ratio(s), comma separated");
  ev->add_option("--beta", betas, "Anticipation ratio(s), comma separated");
  ev->add_option("--samples", samples, "Samples per video");
  ev->add_option("--seed", eval_seed, "Sampling seed");
  ev->add_option("--out", out_path, "Report JSON")->required();

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the training objective");
  gc->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
  gc->add_option("--frames", frames, "Sequence length");
  gc->add_option("--observed", observed, "Observed frames");
  gc->add_option("--stride", stride, "Check every n-th element of each parameter");
  gc->add_option("--tolerance", tolerance, "Maximum relative error");

  auto* ab = app.add_subcommand("ablate", "Train and evaluate one model per axis value");
  ab->add_option("--config", config_path, "Run config JSON")->required()->check(CLI::ExistingFile);
  ab->add_option("--data", data_dir, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  ab->add_option("--axis", axis, "experts, static, router or lambda")->required();
  ab->add_option("--values", values, "Comma separated values")->required();
  ab->add_option("--out", out_path, "CSV output (stdout if omitted)");

  auto* ie = app.add_subcommand("inspect-experts", "Export per-video expert selection matrices");
  ie->add_option("--ckpt", ckpt_dir, "Checkpoint directory")->required()->check(CLI::ExistingDirectory);
  ie->add_option("--data", data_dir, "Corpus directory (defaults to the training corpus)");
  ie->add_option("--alpha", alphas, "Observation ratio");
  ie->add_option("--beta", betas, "Anticipation ratio");
  ie->add_option("--seed", eval_seed, "Sampling seed");
  ie->add_option("--out", out_path, "CSV output")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const ActivityGrammar g =
          grammar_path.empty() ? ActivityGrammar::breakfast_like() : load_grammar(grammar_path);
      const Corpus c = generate_corpus(g, n_videos, seed);
      save_corpus(out_dir, c);
      std::cout << "wrote " << c.videos.size() << " videos (" << c.split(true).size()
                << " test) to " << out_dir << "\n";
    } else if (*tr) {
      const RunConfig rc = load_run_config(config_path);
      const Corpus c = load_corpus(data_dir);
      TrainResult result = train(rc.model, c, [](const EpochLog& e) {
        std::cout << "epoch " << e.epoch << "  rec " << e.rec << "  lb " << e.lb << "  total "
                  << e.total << std::endl;
      });
      save_checkpoint(out_dir, *result.model, fs::absolute(data_dir).string());
      write_text(fs::path(out_dir) / "train_log.json", to_json(result.log));
      std::cout << "checkpoint written to " << out_dir << "\n";
    } else if (*ev) {
      Checkpoint ck = load_checkpoint(ckpt_dir);
      const Corpus c = load_corpus(data_dir.empty() ? ck.data_dir : data_dir);
      std::vector<MoCReport> reports;
      for (double a : parse_reals(alphas)) {
        for (double b : parse_reals(betas)) {
          EvalConfig e{a, b, samples, eval_seed};
          reports.push_back(evaluate(*ck.model, c.split(true), e));
          std::cout << "alpha " << a << " beta " << b << "  mean MoC " << reports.back().mean_moc
                    << "  top-1 MoC " << reports.back().top1_moc << "\n";
        }
      }
      write_text(out_path, reports.size() == 1 ? to_json(reports.front()) : to_json(reports));
    } else if (*gc) {
      const RunConfig rc = load_run_config(config_path);
      MixAntModel model(rc.model);
      const GradCheckResult r = model_gradient_check(model, frames, observed, rc.model.seed, stride);
      std::cout << "checked " << r.checked << " elements, max relative error " << r.max_rel_error
                << " at " << r.worst_parameter << "[" << r.worst_index << "] (analytic "
                << r.worst_analytic << ", numeric " << r.worst_numeric << ")\n";
      return r.max_rel_error <= tolerance ? 0 : 1;
    } else if (*ab) {
      const RunConfig rc = load_run_config(config_path);
      const Corpus c = load_corpus(data_dir);
      const auto rows = run_ablation(rc, c, parse_ablation_axis(axis), split_list(values),
                                     [](const AblationRow& r) {
                                       std::cerr << r.axis << "=" << r.value << "  top-1 "
                                                 << r.top1_moc << "  mean " << r.mean_moc << "\n";
                                     });
      if (out_path.empty()) {
        std::cout << ablation_csv(rows);
      } else {
        write_text(out_path, ablation_csv(rows));
      }
    } else if (*ie) {
      Checkpoint ck = load_checkpoint(ckpt_dir);
      const Corpus c = load_corpus(data_dir.empty() ? ck.data_dir : data_dir);
      std::vector<const Video*> all;
      for (const Video& v : c.videos) all.push_back(&v);
      const EvalConfig e{parse_reals(alphas).front(), parse_reals(betas).front(), 1, eval_seed};
      write_text(out_path, selections_csv(collect_selections(*ck.model, all, e)));
    }
  } catch (const std::exception& e) {
    std::cerr << "mixant: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
