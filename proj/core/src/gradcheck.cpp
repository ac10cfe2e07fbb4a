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

#include "mixant/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace mixant {
namespace {

double evaluate(const LossBuilder& loss) {
  Graph g(/*grad_enabled=*/false);
  return loss(g).value().item();
}

}  // namespace

GradCheckResult finite_difference_check(ParameterStore& store, const LossBuilder& loss,
                                        double step, std::size_t stride) {
  if (stride == 0) stride = 1;
  store.zero_grad();
  {
    Graph g;
    Var l = loss(g);
    g.backward(l);
  }
  const double base = evaluate(loss);
  if (evaluate(loss) != base) {
    throw NonDeterminismError("loss differs between two evaluations at the same point");
  }

  GradCheckResult result;
  for (Parameter& p : store) {
    for (std::size_t i = 0; i < p.value.size(); i += stride) {
      const double orig = p.value[i];
      p.value[i] = orig + step;
      const double up = evaluate(loss);
      p.value[i] = orig - step;
      const double down = evaluate(loss);
      p.value[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad[i];
      const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      ++result.checked;
      if (err > result.max_rel_error || result.checked == 1) {
        result.max_rel_error = std::max(result.max_rel_error, err);
        result.worst_parameter = p.name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace mixant
