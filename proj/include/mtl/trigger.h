// mtl/trigger.h

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

#ifndef MTL_TRIGGER_H_
#define MTL_TRIGGER_H_

#include <cstddef>
#include <string>
#include <vector>

#include "mtl/losses.h"
#include "mtl/tensor.h"

namespace mtl {

struct TriggerPhrase {
  std::string name;
  PhoneSequence phones;
};

struct TriggerScore {
  double log_prob = 0.0;    // log P(phrase | x); -inf when inadmissible
  std::size_t frames = 0;
  double normalized = 0.0;  // log_prob / frames
  bool admissible = true;
};

// Total probability of the phrase under the left-to-right blank-interleaved
// lattice, i.e. -ctc_loss(logprobs, phrase). A phrase that cannot fit in the
// available frames scores -inf with admissible == false.
TriggerScore score_trigger(const Tensor& logprobs, const TriggerPhrase& phrase, int blank);

// Accept iff score.normalized >= threshold.
inline bool detect(const TriggerScore& score, double threshold) {
  return score.normalized >= threshold;
}

// Scores consecutive windows of `window_frames` frames advancing by
// `hop_frames`, for long recordings that contain no trigger. Recordings no
// longer than one window yield a single score over the whole input.
// The last window always ends at the final frame.
std::vector<TriggerScore> score_windows(const Tensor& logprobs, const TriggerPhrase& phrase,
                                        int blank, std::size_t window_frames,
                                        std::size_t hop_frames);

}  // namespace mtl

#endif  // MTL_TRIGGER_H_
