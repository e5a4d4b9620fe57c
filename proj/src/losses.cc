// mtl/losses.cc

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

#include "mtl/losses.h"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mtl/errors.h"
#include "mtl/ops.h"

namespace mtl {

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b <= kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

std::size_t ctc_min_frames(std::span<const int> labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

bool ctc_admissible(std::span<const int> labels, std::size_t frames) {
  return !labels.empty() && ctc_min_frames(labels) <= frames;
}

namespace {

void check_inputs(const Tensor& logprobs, std::span<const int> labels, int blank) {
  if (logprobs.rank() != 2) throw DimensionError("CTC expects T x V log-probabilities, got " +
                                                 shape_to_string(logprobs.shape()));
  const auto vocab = static_cast<int>(logprobs.cols());
  if (blank < 0 || blank >= vocab)
    throw DataError("CTC blank id " + std::to_string(blank) + " outside vocabulary of " +
                    std::to_string(vocab));
  if (labels.empty()) throw DataError("CTC label sequence is empty");
  for (int l : labels)
    if (l < 0 || l >= vocab || l == blank)
      throw DataError("CTC label " + std::to_string(l) + " is not a phone id (vocab " +
                      std::to_string(vocab) + ", blank " + std::to_string(blank) + ")");
  if (!ctc_admissible(labels, logprobs.rows()))
    throw InfeasibleAlignment("CTC: " + std::to_string(labels.size()) + " labels need at least " +
                              std::to_string(ctc_min_frames(labels)) + " frames, got " +
                              std::to_string(logprobs.rows()));
}

std::vector<int> extend(std::span<const int> labels, int blank) {
  std::vector<int> ext(2 * labels.size() + 1, blank);
  for (std::size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  return ext;
}

double emission(const Tensor& lp, std::size_t t, int k) {
  return std::max(lp(t, static_cast<std::size_t>(k)), kLogZero);
}

Tensor forward_table(const Tensor& lp, const std::vector<int>& ext) {
  const std::size_t T = lp.rows(), S = ext.size();
  Tensor alpha({T, S}, kLogZero);
  alpha(0, 0) = emission(lp, 0, ext[0]);
  if (S > 1) alpha(0, 1) = emission(lp, 0, ext[1]);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha(t - 1, s);
      if (s >= 1) a = log_add(a, alpha(t - 1, s - 1));
      if (s >= 2 && ext[s] != ext[0] && ext[s] != ext[s - 2]) a = log_add(a, alpha(t - 1, s - 2));
      alpha(t, s) = a <= kLogZero ? kLogZero : a + emission(lp, t, ext[s]);
    }
  }
  return alpha;
}

double total_from_alpha(const Tensor& alpha) {
  const std::size_t T = alpha.rows(), S = alpha.cols();
  return S > 1 ? log_add(alpha(T - 1, S - 1), alpha(T - 1, S - 2)) : alpha(T - 1, S - 1);
}

}  // namespace

CtcLattice ctc_lattice(const Tensor& logprobs, std::span<const int> labels, int blank) {
  check_inputs(logprobs, labels, blank);
  CtcLattice lat;
  lat.extended = extend(labels, blank);
  const auto& ext = lat.extended;
  const std::size_t T = logprobs.rows(), S = ext.size();
  lat.log_alpha = forward_table(logprobs, ext);
  lat.log_likelihood = total_from_alpha(lat.log_alpha);

  Tensor& beta = lat.log_beta;
  beta = Tensor({T, S}, kLogZero);
  beta(T - 1, S - 1) = emission(logprobs, T - 1, ext[S - 1]);
  beta(T - 1, S - 2) = emission(logprobs, T - 1, ext[S - 2]);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta(t + 1, s);
      if (s + 1 < S) b = log_add(b, beta(t + 1, s + 1));
      if (s + 2 < S && ext[s] != blank && ext[s + 2] != ext[s]) b = log_add(b, beta(t + 1, s + 2));
      beta(t, s) = b <= kLogZero ? kLogZero : b + emission(logprobs, t, ext[s]);
    }
  }
  return lat;
}

double ctc_log_likelihood(const Tensor& logprobs, std::span<const int> labels, int blank) {
  check_inputs(logprobs, labels, blank);
  return total_from_alpha(forward_table(logprobs, extend(labels, blank)));
}

LossAndGrad ctc_loss(const Tensor& logprobs, std::span<const int> labels, int blank) {
  const CtcLattice lat = ctc_lattice(logprobs, labels, blank);
  const std::size_t T = logprobs.rows(), V = logprobs.cols(), S = lat.extended.size();
  LossAndGrad r;
  r.loss = -lat.log_likelihood;
  r.grad = Tensor({T, V}, 0.0);
  std::vector<double> occ(V);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(occ.begin(), occ.end(), kLogZero);
    for (std::size_t s = 0; s < S; ++s) {
      const int k = lat.extended[s];
      const double a = lat.log_alpha(t, s), b = lat.log_beta(t, s);
      if (a <= kLogZero || b <= kLogZero) continue;
      occ[static_cast<std::size_t>(k)] =
          log_add(occ[static_cast<std::size_t>(k)], a + b - emission(logprobs, t, k));
    }
    for (std::size_t k = 0; k < V; ++k)
      if (occ[k] > kLogZero) r.grad(t, k) = -std::exp(occ[k] - lat.log_likelihood);
  }
  return r;
}

Var ctc_loss(Var logprobs, std::span<const int> labels, int blank) {
  auto result = std::make_shared<LossAndGrad>(ctc_loss(logprobs.value(), labels, blank));
  const std::size_t id = logprobs.id();
  return logprobs.tape()->record(Tensor::scalar(result->loss), {logprobs},
                                 [id, result](Tape& t, std::span<const double> g) {
                                   auto d = t.adjoint(id);
                                   auto src = result->grad.data();
                                   for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[0] * src[i];
                                 });
}

LossAndGrad cross_entropy(const Tensor& logits, int target) {
  const std::size_t V = logits.size();
  if (target < 0 || static_cast<std::size_t>(target) >= V)
    throw DataError("cross_entropy target " + std::to_string(target) + " outside [0, " +
                    std::to_string(V) + ")");
  const Tensor flat = logits.reshaped({1, V});
  const Tensor lsm = log_softmax(flat);
  LossAndGrad r;
  r.loss = -lsm[static_cast<std::size_t>(target)];
  r.grad = Tensor(logits.shape());
  for (std::size_t k = 0; k < V; ++k) r.grad[k] = std::exp(lsm[k]);
  r.grad[static_cast<std::size_t>(target)] -= 1.0;
  return r;
}

Var cross_entropy(Var logits, int target) {
  auto result = std::make_shared<LossAndGrad>(cross_entropy(logits.value(), target));
  const std::size_t id = logits.id();
  return logits.tape()->record(Tensor::scalar(result->loss), {logits},
                               [id, result](Tape& t, std::span<const double> g) {
                                 auto d = t.adjoint(id);
                                 auto src = result->grad.data();
                                 for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[0] * src[i];
                               });
}

}  // namespace mtl
