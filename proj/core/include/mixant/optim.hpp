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

#include <cstddef>
#include <vector>

#include "mixant/autograd.hpp"

namespace mixant {

struct AdamWOptions {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// AdamW with decoupled weight decay. Decay applies to matrices only;
/// vectors (biases, norms) and log-transition parameters are exempt.
class AdamW {
 public:
  AdamW(ParameterStore& params, AdamWOptions options);

  /// Applies one update from the gradients currently in the store.
  void step();
  std::size_t steps() const noexcept { return steps_; }

 private:
  struct Slot {
    Parameter* param;
    std::vector<double> m;
    std::vector<double> v;
    bool decay;
  };
  AdamWOptions options_;
  std::vector<Slot> slots_;
  std::size_t steps_ = 0;
};

}  // namespace mixant
