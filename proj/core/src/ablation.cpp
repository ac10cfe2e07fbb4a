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

#include "mixant/ablation.hpp"

#include <charconv>
#include <iomanip>
#include <sstream>

#include "mixant/evaluate.hpp"
#include "mixant/metrics.hpp"
#include "mixant/trainer.hpp"

namespace mixant {

namespace {

std::size_t parse_count(const std::string& s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& s) {
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  double v = 0.0;
  if (!(is >> v) || !is.eof()) throw ConfigError("expected a number, got '" + s + "'");
  return v;
}

}  // namespace

AblationAxis parse_ablation_axis(const std::string& s) {
  if (s == "experts") return AblationAxis::experts;
  if (s == "static") return AblationAxis::static_blocks;
  if (s == "router") return AblationAxis::router;
  if (s == "lambda") return AblationAxis::lambda;
  throw ConfigError("unknown ablation axis '" + s + "' (experts, static, router, lambda)");
}

std::string to_string(AblationAxis axis) {
  switch (axis) {
    case AblationAxis::experts: return "experts";
    case AblationAxis::static_blocks: return "static";
    case AblationAxis::router: return "router";
    case AblationAxis::lambda: return "lambda";
  }
  return "?";
}

ModelConfig apply_ablation_value(const ModelConfig& base, AblationAxis axis,
                                 const std::string& value) {
  ModelConfig c = base;
  switch (axis) {
    case AblationAxis::experts: c.num_experts = parse_count(value); break;
    case AblationAxis::static_blocks: c.static_blocks = parse_count(value); break;
    case AblationAxis::router:
      try {
        c.router_mode = parse_router_mode(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      break;
    case AblationAxis::lambda: c.lambda_lb = parse_real(value); break;
  }
  c.validate();
  return c;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const Corpus& corpus,
                                      AblationAxis axis, const std::vector<std::string>& values,
                                      const AblationProgress& progress) {
  std::vector<AblationRow> rows;
  for (const std::string& value : values) {
    const ModelConfig cfg = apply_ablation_value(base.model, axis, value);
    TrainResult tr = train(cfg, corpus);
    const MoCReport rep = evaluate(*tr.model, corpus.split(true), base.eval);
    AblationRow row;
    row.axis = to_string(axis);
    row.value = value;
    row.top1_moc = rep.top1_moc;
    row.mean_moc = rep.mean_moc;
    row.usage_kl = tr.log.empty() ? 0.0 : usage_kl(tr.log.back().hard_usage);
    row.final_rec_loss = tr.log.empty() ? 0.0 : tr.log.back().rec;
    if (progress) progress(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "axis,value,top1_moc,mean_moc,usage_kl,final_rec_loss\n" << std::setprecision(10);
  for (const AblationRow& r : rows) {
    os << r.axis << "," << r.value << "," << r.top1_moc << "," << r.mean_moc << "," << r.usage_kl
       << "," << r.final_rec_loss << "\n";
  }
  return os.str();
}

}  // namespace mixant
