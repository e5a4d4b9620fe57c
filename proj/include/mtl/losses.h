// mtl/losses.h

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

#ifndef MTL_LOSSES_H_
#define MTL_LOSSES_H_

#include <cstddef>
#include <span>
#include <vector>

#include "mtl/tape.h"
#include "mtl/tensor.h"

namespace mtl {

// Stand-in for log(0) in the CTC recursions. Inputs below it are clamped.
inline constexpr double kLogZero = -1e30;

double log_add(double a, double b);

using PhoneSequence = std::vector<int>;

// Fewest frames able to emit `labels`: one per label plus a separating
// blank between each pair of equal neighbours.
std::size_t ctc_min_frames(std::span<const int> labels);
bool ctc_admissible(std::span<const int> labels, std::size_t frames);

/// Forward-backward tables over the blank-interleaved label sequence
/// (blank, l1, blank, l2, ..., lL, blank). Both tables include the emission
/// at their own frame, so for every t
///   log_likelihood = logsum_s alpha[t][s] + beta[t][s] - logprob[t][ext[s]].
struct CtcLattice {
  std::vector<int> extended;
  Tensor log_alpha;  // T x (2L+1)
  Tensor log_beta;   // T x (2L+1)
  double log_likelihood = kLogZero;
};

// `logprobs` is T x V; `blank` is the blank column. Throws DataError for
// labels outside [0, V) or equal to blank, InfeasibleAlignment when the
// labels cannot fit in T frames.
CtcLattice ctc_lattice(const Tensor& logprobs, std::span<const int> labels, int blank);

// Forward recursion only: log P(labels | logprobs).
double ctc_log_likelihood(const Tensor& logprobs, std::span<const int> labels, int blank);

struct LossAndGrad {
  double loss = 0.0;
  Tensor grad;  // same shape as the scored input
};

// -log P(labels | logprobs) and its gradient with respect to `logprobs`.
LossAndGrad ctc_loss(const Tensor& logprobs, std::span<const int> labels, int blank);
Var ctc_loss(Var logprobs, std::span<const int> labels, int blank);

// -log softmax(logits)[target]; gradient softmax(logits) - onehot(target).
LossAndGrad cross_entropy(const Tensor& logits, int target);
Var cross_entropy(Var logits, int target);

/// Per-task mean losses of one batch and their unit-weight sum.
struct TaskLosses {
  double trigger = 0.0;  // C_vt: mean CTC loss over phone-labelled examples
  double speaker = 0.0;  // C_spk: mean cross-entropy over speaker-labelled examples
  std::size_t trigger_count = 0;
  std::size_t speaker_count = 0;

  double total() const { return trigger + speaker; }
};

inline double mtl_objective(double trigger_loss, double speaker_loss) {
  return trigger_loss + speaker_loss;
}

}  // namespace mtl

#endif  // MTL_LOSSES_H_
