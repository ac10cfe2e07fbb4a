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

#include "mixant/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "config_json.hpp"

namespace mixant {
namespace {

using nlohmann::json;

template <class Visitor>
void visit_fields(ModelConfig& c, Visitor&& v) {
  v("num_classes", c.num_classes);
  v("feature_dim", c.feature_dim);
  v("d_model", c.d_model);
  v("expand", c.expand);
  v("d_state", c.d_state);
  v("conv_width", c.conv_width);
  v("mlp_ratio", c.mlp_ratio);
  v("num_blocks", c.num_blocks);
  v("static_blocks", c.static_blocks);
  v("num_experts", c.num_experts);
  v("router_mode", c.router_mode);
  v("gate_on_observed_only", c.gate_on_observed_only);
  v("straight_through", c.straight_through);
  v("discretization", c.discretization);
  v("expert_jitter", c.expert_jitter);
  v("diffusion_steps", c.diffusion_steps);
  v("beta_start", c.beta_start);
  v("beta_end", c.beta_end);
  v("ddim_steps", c.ddim_steps);
  v("lambda_lb", c.lambda_lb);
  v("epochs", c.epochs);
  v("batch_size", c.batch_size);
  v("learning_rate", c.learning_rate);
  v("adam_beta1", c.adam_beta1);
  v("adam_beta2", c.adam_beta2);
  v("adam_eps", c.adam_eps);
  v("weight_decay", c.weight_decay);
  v("train_alphas", c.train_alphas);
  v("train_betas", c.train_betas);
  v("seed", c.seed);
}

template <class Visitor>
void visit_fields(EvalConfig& c, Visitor&& v) {
  v("alpha", c.alpha);
  v("beta", c.beta);
  v("samples", c.samples);
  v("seed", c.seed);
}

template <class Config>
json fields_to_json(Config c) {
  json out = json::object();
  visit_fields(c, [&](const char* name, auto& field) { out[name] = detail::encode(field); });
  return out;
}

template <class Config>
Config fields_from_json(const json& j, const char* section) {
  if (!j.is_object()) throw ConfigError(std::string(section) + " must be a JSON object");
  Config c;
  std::set<std::string> known;
  visit_fields(c, [&](const char* name, auto& field) {
    known.insert(name);
    if (!j.contains(name)) {
      throw ConfigError(std::string(section) + "." + name + " is missing");
    }
    try {
      detail::decode(j.at(name), field);
    } catch (const std::exception& e) {
      throw ConfigError(std::string(section) + "." + name + ": " + e.what());
    }
  });
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(std::string("unknown key ") + section + "." + key);
  }
  return c;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (num_classes < 1) fail("num_classes must be >= 1");
  if (feature_dim < 1) fail("feature_dim must be >= 1");
  if (d_model < 1 || expand < 1 || d_state < 1 || conv_width < 1 || mlp_ratio < 1) {
    fail("layer widths must be >= 1");
  }
  if (num_blocks < 1) fail("num_blocks must be >= 1");
  if (static_blocks > num_blocks) fail("static_blocks must lie in [0, num_blocks]");
  if (num_experts < 1) fail("num_experts must be >= 1");
  if (diffusion_steps < 1) fail("diffusion_steps must be >= 1");
  if (!(beta_start > 0.0 && beta_end >= beta_start && beta_end < 1.0)) {
    fail("noise schedule needs 0 < beta_start <= beta_end < 1");
  }
  if (ddim_steps < 1 || ddim_steps > diffusion_steps) {
    fail("ddim_steps must lie in [1, diffusion_steps]");
  }
  if (!(lambda_lb >= 0.0 && lambda_lb < 1.0)) fail("lambda_lb must lie in [0, 1)");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (train_alphas.empty() || train_betas.empty()) fail("train_alphas/train_betas must be non-empty");
  for (double a : train_alphas)
    for (double b : train_betas)
      if (!(a > 0.0 && b > 0.0 && a + b <= 1.0)) fail("training windows need a, b > 0 and a + b <= 1");
}

void EvalConfig::validate() const {
  if (!(alpha > 0.0 && beta > 0.0 && alpha + beta <= 1.0)) {
    throw ConfigError("eval window needs alpha, beta > 0 and alpha + beta <= 1");
  }
  if (samples < 1) throw ConfigError("samples must be >= 1");
}

RunConfig parse_run_config(const std::string& json_text) {
  const json j = parse_text(json_text);
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key != "model" && key != "eval") throw ConfigError("unknown top-level key " + key);
  }
  if (!j.contains("model")) throw ConfigError("config needs a \"model\" object");
  RunConfig rc;
  rc.model = fields_from_json<ModelConfig>(j.at("model"), "model");
  if (j.contains("eval")) rc.eval = fields_from_json<EvalConfig>(j.at("eval"), "eval");
  rc.model.validate();
  rc.eval.validate();
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& config, int indent) {
  json j;
  j["model"] = fields_to_json(config.model);
  j["eval"] = fields_to_json(config.eval);
  return j.dump(indent);
}

ModelConfig parse_model_config(const std::string& json_text) {
  ModelConfig c = fields_from_json<ModelConfig>(parse_text(json_text), "model");
  c.validate();
  return c;
}

std::string to_json(const ModelConfig& config, int indent) {
  return fields_to_json(config).dump(indent);
}

}  // namespace mixant
