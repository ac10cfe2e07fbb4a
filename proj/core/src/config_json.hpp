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

// Private JSON codecs for configuration fields.

#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include "json.hpp"
#include "mixant/router.hpp"
#include "mixant/ssm.hpp"

namespace mixant::detail {

inline nlohmann::json encode(RouterMode m) { return to_string(m); }
inline nlohmann::json encode(InputDiscretization d) {
  return d == InputDiscretization::zoh ? "zoh" : "euler";
}
template <class T>
nlohmann::json encode(const T& v) {
  return nlohmann::json(v);
}

inline void decode(const nlohmann::json& j, RouterMode& m) {
  m = parse_router_mode(j.get<std::string>());
}
inline void decode(const nlohmann::json& j, InputDiscretization& d) {
  const auto s = j.get<std::string>();
  if (s == "zoh") {
    d = InputDiscretization::zoh;
  } else if (s == "euler") {
    d = InputDiscretization::euler;
  } else {
    throw std::invalid_argument("unknown discretization '" + s + "'");
  }
}
inline void decode(const nlohmann::json& j, bool& b) {
  if (!j.is_boolean()) throw std::invalid_argument("expected a boolean");
  b = j.get<bool>();
}
template <class T>
void decode(const nlohmann::json& j, T& v) {
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                   j.get<std::int64_t>() < 0)) {
      throw std::invalid_argument("expected a non-negative integer");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw std::invalid_argument("expected a number");
  }
  v = j.get<T>();
}

}  // namespace mixant::detail
