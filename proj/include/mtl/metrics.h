// mtl/metrics.h

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

#ifndef MTL_METRICS_H_
#define MTL_METRICS_H_

#include <filesystem>
#include <optional>
#include <vector>

namespace mtl {

struct ScoreSet {
  std::vector<double> target_scores;
  std::vector<double> nontarget_scores;
  std::optional<double> negative_audio_hours;
};

// Decision rule at threshold t: accept iff score >= t. A nontarget scoring
// exactly t is a false accept; a target scoring exactly t is accepted.
struct DetPoint {
  double threshold = 0.0;
  double fa_per_hour = 0.0;
  double fr_rate = 0.0;  // in [0, 1]
};

struct DetCurve {
  std::vector<DetPoint> points;  // ascending threshold
};

// One point per distinct score. Requires negative_audio_hours > 0.
DetCurve det_curve(const ScoreSet& scores);

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

// Equal-error rate, linearly interpolating FAR and FRR between the two sweep
// points that bracket the crossing. The sweep includes -inf and +inf.
EerResult eer(const ScoreSet& scores);

// Smallest false-reject rate over thresholds that admit no false accepts.
double fr_at_zero_fa(const ScoreSet& scores);

// Percent: 100 * (baseline - updated) / baseline.
double relative_improvement(double baseline_eer, double new_eer);

void write_det_csv(const std::filesystem::path& path, const DetCurve& curve);

}  // namespace mtl

#endif  // MTL_METRICS_H_
