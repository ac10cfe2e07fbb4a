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

#include "mixant/tensor_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace mixant {
namespace {

constexpr std::array<char, 8> kMagic{'M', 'X', 'T', '0', '\0', '\0', '\0', '\0'};

template <class U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> bytes;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <class U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("MXT0: truncated stream");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t, DType dtype) {
  nlohmann::json header;
  header["shape"] = t.shape();
  header["dtype"] = dtype == DType::f32 ? "f32" : "f64";
  const std::string text = header.dump();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : t.data()) {
    if (dtype == DType::f32) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  if (!out) throw FormatError("MXT0: write failed");
}

Tensor read_tensor(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError("MXT0: bad magic");
  const auto len = get_le<std::uint64_t>(in);
  if (len > (1u << 20)) throw FormatError("MXT0: header too large");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw FormatError("MXT0: truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("MXT0: header is not JSON: ") + e.what());
  }
  if (!header.contains("shape") || !header.contains("dtype")) {
    throw FormatError("MXT0: header needs shape and dtype");
  }
  Shape shape = header["shape"].get<Shape>();
  const std::string dtype = header["dtype"].get<std::string>();
  if (dtype != "f32" && dtype != "f64") throw FormatError("MXT0: unknown dtype " + dtype);
  Tensor t(shape);
  for (auto& v : t.data()) {
    if (dtype == "f32") {
      v = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(in)));
    } else {
      v = std::bit_cast<double>(get_le<std::uint64_t>(in));
    }
  }
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_tensor(out, t, dtype);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_tensor(in);
}

}  // namespace mixant
