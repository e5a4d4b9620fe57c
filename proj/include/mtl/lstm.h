// mtl/lstm.h

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

#ifndef MTL_LSTM_H_
#define MTL_LSTM_H_

#include <span>

#include "mtl/tape.h"

namespace mtl {

// Weights of one LSTM direction. Gate blocks are laid out [input, forget,
// cell candidate, output] along the 4H axis.
struct LstmDirection {
  Var w;     // in x 4H
  Var u;     // H x 4H
  Var bias;  // 4H
};

struct BiLstmLayer {
  LstmDirection forward;
  LstmDirection backward;
};

// One bidirectional layer over a T x in sequence. Row t of the T x 2H result
// is [forward h_t, backward h_t]. Recorded as a single tape node with a
// hand-written backpropagation-through-time adjoint.
Var bilstm_layer(Var x, const BiLstmLayer& layer);

// Layers applied in order. Throws DataError on an empty sequence and
// DimensionError when the input width does not match the first layer.
Var bilstm_stack_forward(Var x, std::span<const BiLstmLayer> layers);

}  // namespace mtl

#endif  // MTL_LSTM_H_
