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

#include "mixant/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mixant/tensor_io.hpp"

namespace mixant {

namespace fs = std::filesystem;
using nlohmann::json;

void save_checkpoint(const fs::path& dir, const MixAntModel& model, const std::string& data_dir) {
  fs::create_directories(dir / "tensors");
  json manifest;
  manifest["format"] = "mixant-checkpoint-v1";
  manifest["config"] = json::parse(to_json(model.config()));
  manifest["data_dir"] = data_dir;
  json tensors = json::array();
  for (const Parameter& p : model.parameters()) {
    const std::string file = "tensors/" + p.name + ".mxt";
    save_tensor(dir / file, p.value, DType::f64);
    tensors.push_back({{"name", p.name}, {"file", file}});
  }
  manifest["tensors"] = std::move(tensors);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw FormatError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << "\n";
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("no manifest.json in " + dir.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json manifest;
  try {
    manifest = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint manifest is not JSON: ") + e.what());
  }
  if (manifest.value("format", "") != "mixant-checkpoint-v1") {
    throw FormatError("unsupported checkpoint format in " + dir.string());
  }
  Checkpoint ck;
  ck.model = std::make_unique<MixAntModel>(parse_model_config(manifest.at("config").dump()));
  ck.data_dir = manifest.value("data_dir", "");
  std::size_t loaded = 0;
  for (const auto& entry : manifest.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    Parameter& p = ck.model->parameters().get(name);
    Tensor t = load_tensor(dir / entry.at("file").get<std::string>());
    if (t.shape() != p.value.shape()) {
      throw FormatError("checkpoint tensor " + name + " has shape " + shape_string(t.shape()) +
                        ", model expects " + shape_string(p.value.shape()));
    }
    p.value = std::move(t);
    ++loaded;
  }
  if (loaded != ck.model->parameters().size()) {
    throw FormatError("checkpoint is missing parameters");
  }
  return ck;
}

}  // namespace mixant
