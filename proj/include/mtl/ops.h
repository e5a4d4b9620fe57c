// mtl/ops.h

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

#ifndef MTL_OPS_H_
#define MTL_OPS_H_

#include <cstddef>

#include "mtl/tape.h"
#include "mtl/tensor.h"

namespace mtl {

// Differentiable operations. Binary elementwise ops accept equal shapes or a
// single-element operand on either side; nothing else broadcasts.

enum class ElementwiseOp { kSigmoid, kTanh, kExp, kLog, kAdd, kMul };

Var elementwise(ElementwiseOp op, Var a);
Var elementwise(ElementwiseOp op, Var a, Var b);

inline Var sigmoid(Var a) { return elementwise(ElementwiseOp::kSigmoid, a); }
inline Var tanh(Var a) { return elementwise(ElementwiseOp::kTanh, a); }
inline Var exp(Var a) { return elementwise(ElementwiseOp::kExp, a); }
// Throws DomainError on any nonpositive entry.
inline Var log(Var a) { return elementwise(ElementwiseOp::kLog, a); }
inline Var add(Var a, Var b) { return elementwise(ElementwiseOp::kAdd, a, b); }
inline Var mul(Var a, Var b) { return elementwise(ElementwiseOp::kMul, a, b); }

Var scale(Var a, double factor);

// a[m x k] * b[k x n].
Var matmul(Var a, Var b);

// x[m x k] * w[k x n] + bias[n], the bias added to every row.
Var affine(Var x, Var w, Var bias);

Var transpose(Var a);

// Row-wise log-softmax over the last dimension, max-subtracted.
Var log_softmax(Var x);

Var sum(Var a);

// Single element at a flat row-major index, as a 1-element tensor.
Var select(Var a, std::size_t index);

// Non-recording helpers shared by the differentiable ops and by inference.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor log_softmax(const Tensor& x);

}  // namespace mtl

#endif  // MTL_OPS_H_
