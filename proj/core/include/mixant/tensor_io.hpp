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
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "mixant/tensor.hpp"

namespace mixant {

/// MXT0 tensor container:
///
///   bytes 0..7   magic "MXT0" followed by four NUL bytes
///   bytes 8..15  header length L, uint64 little-endian
///   next L bytes UTF-8 JSON {"shape":[...],"dtype":"f32"|"f64"}
///   remainder    numel(shape) little-endian IEEE-754 values
enum class DType { f32, f64 };

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_tensor(std::ostream& out, const Tensor& t, DType dtype = DType::f64);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& t,
                 DType dtype = DType::f64);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace mixant
