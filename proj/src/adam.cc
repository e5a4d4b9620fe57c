// mtl/adam.cc

// Copyright 2026 The mtlspeech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mtl/adam.h"

#include <cmath>

#include "mtl/errors.h"

namespace mtl {

AdamState::AdamState(const ParameterSet& params, AdamOptions opts)
    : options(opts) {
  m.reserve(params.size());
  v.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    m.emplace_back(params.at(i).size(), 0.0);
    v.emplace_back(params.at(i).size(), 0.0);
  }
}

void adam_step(ParameterSet& params, const GradientSet& grads, AdamState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size())
    throw DimensionError("adam: parameter, gradient and moment sets are not congruent");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = grads.at(i);
    if (g.size() != params.at(i).size() || state.m[i].size() != g.size() ||
        state.v[i].size() != g.size())
      throw DimensionError("adam: buffer size mismatch for parameter " +
                           params.names()[i]);
    for (double x : g)
      if (!std::isfinite(x))
        throw NumericalError("adam: non-finite gradient in parameter " +
                             params.names()[i]);
  }

  const AdamOptions& o = state.options;
  const double t = static_cast<double>(state.step + 1);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.at(i).data();
    const auto& g = grads.at(i);
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
    }
  }
  ++state.step;
}

}  // namespace mtl
