// mtl/trigger.cc

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

#include "mtl/trigger.h"

#include <limits>

#include "mtl/errors.h"

namespace mtl {

TriggerScore score_trigger(const Tensor& logprobs, const TriggerPhrase& phrase, int blank) {
  if (phrase.phones.empty()) throw DataError("trigger phrase '" + phrase.name + "' has no phones");
  TriggerScore s;
  s.frames = logprobs.rows();
  if (!ctc_admissible(phrase.phones, s.frames)) {
    s.admissible = false;
    s.log_prob = -std::numeric_limits<double>::infinity();
    s.normalized = s.log_prob;
    return s;
  }
  s.log_prob = ctc_log_likelihood(logprobs, phrase.phones, blank);
  if (s.log_prob <= 0.5 * kLogZero) s.log_prob = -std::numeric_limits<double>::infinity();
  s.normalized = s.log_prob / static_cast<double>(s.frames);
  return s;
}

std::vector<TriggerScore> score_windows(const Tensor& logprobs, const TriggerPhrase& phrase,
                                        int blank, std::size_t window_frames,
                                        std::size_t hop_frames) {
  if (window_frames == 0 || hop_frames == 0)
    throw ConfigError("trigger window and hop must be positive");
  const std::size_t T = logprobs.rows(), V = logprobs.cols();
  if (T <= window_frames) return {score_trigger(logprobs, phrase, blank)};
  auto window_at = [&](std::size_t start) {
    Tensor win({window_frames, V});
    std::copy_n(logprobs.data().begin() + static_cast<std::ptrdiff_t>(start * V),
                window_frames * V, win.data().begin());
    return score_trigger(win, phrase, blank);
  };
  std::vector<TriggerScore> out;
  std::size_t start = 0;
  for (; start + window_frames <= T; start += hop_frames) out.push_back(window_at(start));
  // A final window flush with the end covers any tail the hop skipped.
  if (start - hop_frames + window_frames < T) out.push_back(window_at(T - window_frames));
  return out;
}

}  // namespace mtl
