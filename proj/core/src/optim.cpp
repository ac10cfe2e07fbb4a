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

#include "mixant/optim.hpp"

#include <cmath>

namespace mixant {

AdamW::AdamW(ParameterStore& params, AdamWOptions options) : options_(options) {
  for (Parameter& p : params) {
    const bool decay = p.value.rank() >= 2 && p.name.find("A_log") == std::string::npos;
    slots_.push_back(Slot{&p, std::vector<double>(p.value.size(), 0.0),
                          std::vector<double>(p.value.size(), 0.0), decay});
  }
}

void AdamW::step() {
  ++steps_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = options_.learning_rate;
  for (Slot& s : slots_) {
    auto& w = s.param->value.storage();
    const auto& g = s.param->grad.storage();
    const double wd = s.decay ? options_.weight_decay : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      s.m[i] = b1 * s.m[i] + (1.0 - b1) * g[i];
      s.v[i] = b2 * s.v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = s.m[i] / c1;
      const double vhat = s.v[i] / c2;
      w[i] -= lr * (mhat / (std::sqrt(vhat) + options_.eps) + wd * w[i]);
    }
  }
}

}  // namespace mixant
