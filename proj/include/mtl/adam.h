// mtl/adam.h

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

#ifndef MTL_ADAM_H_
#define MTL_ADAM_H_

#include <cstdint>
#include <vector>

#include "mtl/params.h"

namespace mtl {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamState() = default;
  AdamState(const ParameterSet& params, AdamOptions options);

  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  AdamOptions options;
};

// One bias-corrected Adam update. The gradients are checked for NaN/Inf
// before anything is touched; a bad gradient raises NumericalError naming
// the parameter and leaves both `params` and `state` unchanged.
void adam_step(ParameterSet& params, const GradientSet& grads, AdamState& state);

}  // namespace mtl

#endif  // MTL_ADAM_H_
