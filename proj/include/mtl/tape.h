// mtl/tape.h

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

#ifndef MTL_TAPE_H_
#define MTL_TAPE_H_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "mtl/tensor.h"

namespace mtl {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  bool requires_grad() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records the forward computation as a list of nodes, each with a closure
/// that pushes its output adjoint back to its inputs. Nodes are appended in
/// topological order, so backward() is one reverse sweep. A tape is
/// single-threaded and meant to live for one forward/backward pass.
class Tape {
 public:
  // Receives the adjoint of the node's output; must add into the adjoints of
  // its inputs via Tape::adjoint() (only for inputs with requires_grad()).
  using Backward = std::function<void(Tape&, std::span<const double>)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  // Leaf that reads `value` in place. `value` must outlive the tape.
  Var parameter(const Tensor& value);

  Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Tensor value, std::span<const Var> inputs, Backward backward);

  const Tensor& value(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  // Adjoint buffer of a node, zero-allocated on first access.
  std::span<double> adjoint(std::size_t id);

  // Seeds d(root)/d(root) = 1 and sweeps the tape in reverse. `root` must be
  // a single-element value.
  void backward(Var root);

  // Gradient of the last backward() root with respect to `v`; zeros when the
  // root does not depend on it.
  std::vector<double> gradient(Var v) const;
  void add_gradient_to(Var v, std::span<double> dst) const;

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* borrowed = nullptr;
    std::vector<double> adjoint;
    Backward backward;
    bool requires_grad = false;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
};

}  // namespace mtl

#endif  // MTL_TAPE_H_
