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
#include <functional>
#include <stdexcept>
#include <string>

#include "mixant/autograd.hpp"

namespace mixant {

class NonDeterminismError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds a scalar loss on `graph` from the parameters of a store.
using LossBuilder = std::function<Var(Graph& graph)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients against central differences for every
/// element of every parameter in `store`.
///
/// The error of one element is |analytic - numeric| / max(1, |numeric|).
/// `stride` > 1 checks every stride-th element of each parameter. Throws
/// NonDeterminismError if two evaluations at the same point disagree.
GradCheckResult finite_difference_check(ParameterStore& store, const LossBuilder& loss,
                                        double step = 1e-5, std::size_t stride = 1);

}  // namespace mixant
