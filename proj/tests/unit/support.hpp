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

#include <cmath>
#include <cstdint>
#include <string>

#include "mixant/autograd.hpp"
#include "mixant/gradcheck.hpp"
#include "mixant/ops.hpp"
#include "mixant/rng.hpp"
#include "mixant/tensor.hpp"

namespace mixant::testing {

inline Tensor randn(Shape shape, std::uint64_t seed, double sd = 1.0) {
  Rng rng(seed);
  return rng.normal_tensor(std::move(shape), sd);
}

inline Tensor randu(Shape shape, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  return rng.uniform_tensor(std::move(shape), lo, hi);
}

/// A fixed random weighting turns any tensor-valued op into a scalar loss
/// whose gradient exercises every output element.
inline Var weighted_sum(Var y, std::uint64_t seed) {
  Graph& g = y.graph();
  return ops::sum(ops::mul(y, g.constant(randn(y.shape(), seed))));
}

}  // namespace mixant::testing
