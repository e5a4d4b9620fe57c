// mtl/tape.cc

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

#include "mtl/tape.h"

#include <algorithm>

#include "mtl/errors.h"

namespace mtl {

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::parameter(const Tensor& value) {
  Node n;
  n.borrowed = &value;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs,
                 Backward backward) {
  return record(std::move(value),
                std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backward backward) {
  Node n;
  n.owned = std::move(value);
  for (const Var& v : inputs) {
    if (v.tape() != this) throw Error("operand recorded on a different tape");
    n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.borrowed ? *n.borrowed : n.owned;
}

std::span<double> Tape::adjoint(std::size_t id) {
  Node& n = nodes_[id];
  if (n.adjoint.empty()) n.adjoint.assign(value(id).size(), 0.0);
  return n.adjoint;
}

void Tape::backward(Var root) {
  if (root.tape() != this) throw Error("backward root is not on this tape");
  if (value(root.id()).size() != 1)
    throw DimensionError("backward root must be a scalar, got " +
                         shape_to_string(value(root.id()).shape()));
  for (Node& n : nodes_) n.adjoint.clear();
  adjoint(root.id())[0] = 1.0;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.backward || n.adjoint.empty()) continue;
    n.backward(*this, n.adjoint);
  }
}

std::vector<double> Tape::gradient(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.adjoint.empty()) return std::vector<double>(value(v.id()).size(), 0.0);
  return n.adjoint;
}

void Tape::add_gradient_to(Var v, std::span<double> dst) const {
  const Node& n = nodes_[v.id()];
  if (n.adjoint.empty()) return;
  if (dst.size() != n.adjoint.size())
    throw DimensionError("gradient destination has wrong size");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.adjoint[i];
}

}  // namespace mtl
