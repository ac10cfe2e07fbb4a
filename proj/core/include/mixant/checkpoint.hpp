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

#include <filesystem>
#include <memory>
#include <string>

#include "mixant/model.hpp"

namespace mixant {

// A checkpoint is a directory:
//   manifest.json    {"format", "config", "tensors": [{"name", "file"}], "data_dir"}
//   tensors/*.mxt    one MXT0 file per parameter

struct Checkpoint {
  std::unique_ptr<MixAntModel> model;
  std::string data_dir;  // corpus the model was trained on, may be empty
};

void save_checkpoint(const std::filesystem::path& dir, const MixAntModel& model,
                     const std::string& data_dir = {});
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace mixant
