// mtl/params.cc

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

#include "mtl/params.h"

#include <algorithm>

#include "mtl/errors.h"

namespace mtl {

Tensor& ParameterSet::add(const std::string& name, Tensor value) {
  if (index_.count(name)) throw Error("duplicate parameter name " + name);
  index_[name] = names_.size();
  names_.push_back(name);
  tensors_.push_back(std::move(value));
  return tensors_.back();
}

bool ParameterSet::contains(const std::string& name) const {
  return index_.count(name) > 0;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no parameter named " + name);
  return it->second;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no parameter named " + name);
  return tensors_[it->second];
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("no parameter named " + name);
  return tensors_[it->second];
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.size();
  return n;
}

GradientSet::GradientSet(const ParameterSet& params) {
  buffers_.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    buffers_.emplace_back(params.at(i).size(), 0.0);
}

void GradientSet::zero() {
  for (auto& b : buffers_) std::fill(b.begin(), b.end(), 0.0);
}

void GradientSet::add(const GradientSet& other) {
  if (other.size() != size()) throw DimensionError("gradient sets differ in size");
  for (std::size_t i = 0; i < buffers_.size(); ++i) {
    auto& dst = buffers_[i];
    const auto& src = other.buffers_[i];
    if (dst.size() != src.size())
      throw DimensionError("gradient buffer " + std::to_string(i) + " differs in size");
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

void GradientSet::scale(double factor) {
  for (auto& b : buffers_)
    for (double& v : b) v *= factor;
}

}  // namespace mtl
