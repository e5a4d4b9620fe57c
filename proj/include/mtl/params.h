// mtl/params.h

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

#ifndef MTL_PARAMS_H_
#define MTL_PARAMS_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mtl/tensor.h"

namespace mtl {

/// Named parameter tensors in insertion order. Names are unique.
class ParameterSet {
 public:
  Tensor& add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  Tensor& at(std::size_t i) { return tensors_[i]; }
  const Tensor& at(std::size_t i) const { return tensors_[i]; }

  std::size_t scalar_count() const;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::map<std::string, std::size_t> index_;
};

/// Flat gradient buffers congruent with a ParameterSet (same order).
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(const ParameterSet& params);

  std::size_t size() const { return buffers_.size(); }
  std::vector<double>& at(std::size_t i) { return buffers_[i]; }
  const std::vector<double>& at(std::size_t i) const { return buffers_[i]; }

  void zero();
  void add(const GradientSet& other);
  void scale(double factor);

 private:
  std::vector<std::vector<double>> buffers_;
};

}  // namespace mtl

#endif  // MTL_PARAMS_H_
