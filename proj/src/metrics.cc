// mtl/metrics.cc

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

#include "mtl/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mtl/errors.h"
#include "mtl/io.h"

namespace mtl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (std::isnan(x)) throw DataError(std::string(what) + " scores contain NaN");
}

// Sorted copies let each threshold be answered with a binary search.
struct Sorted {
  std::vector<double> tgt, non;
  explicit Sorted(const ScoreSet& s) : tgt(s.target_scores), non(s.nontarget_scores) {
    check_finite(tgt, "target");
    check_finite(non, "nontarget");
    std::sort(tgt.begin(), tgt.end());
    std::sort(non.begin(), non.end());
  }
  // Targets below t.
  std::size_t misses(double t) const {
    return static_cast<std::size_t>(std::lower_bound(tgt.begin(), tgt.end(), t) - tgt.begin());
  }
  // Nontargets at or above t.
  std::size_t false_accepts(double t) const {
    return static_cast<std::size_t>(non.end() - std::lower_bound(non.begin(), non.end(), t));
  }
  std::vector<double> thresholds() const {
    std::vector<double> all(tgt);
    all.insert(all.end(), non.begin(), non.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
  }
};

}  // namespace

DetCurve det_curve(const ScoreSet& scores) {
  if (!scores.negative_audio_hours)
    throw DataError("DET curve needs negative_audio_hours (hours of non-trigger audio)");
  const double hours = *scores.negative_audio_hours;
  if (!(hours > 0.0)) throw DataError("negative_audio_hours must be positive");
  if (scores.target_scores.empty()) throw DataError("DET curve needs at least one target score");
  Sorted s(scores);
  DetCurve curve;
  const auto nt = static_cast<double>(s.tgt.size());
  for (double t : s.thresholds())
    curve.points.push_back({t, static_cast<double>(s.false_accepts(t)) / hours,
                            static_cast<double>(s.misses(t)) / nt});
  return curve;
}

EerResult eer(const ScoreSet& scores) {
  if (scores.target_scores.empty() || scores.nontarget_scores.empty())
    throw DataError("EER needs nonempty target and nontarget score lists");
  Sorted s(scores);
  std::vector<double> th = s.thresholds();
  th.insert(th.begin(), -kInf);
  th.push_back(kInf);
  const auto nt = static_cast<double>(s.tgt.size()), nn = static_cast<double>(s.non.size());
  auto far = [&](double t) { return static_cast<double>(s.false_accepts(t)) / nn; };
  auto frr = [&](double t) { return static_cast<double>(s.misses(t)) / nt; };

  // FRR - FAR runs from -1 at -inf to +1 at +inf and never decreases.
  for (std::size_t i = 1; i < th.size(); ++i) {
    const double d1 = frr(th[i]) - far(th[i]);
    if (d1 < 0.0) continue;
    if (d1 == 0.0) return {frr(th[i]), th[i]};
    const double d0 = frr(th[i - 1]) - far(th[i - 1]);
    const double w = -d0 / (d1 - d0);
    const double rate = far(th[i - 1]) + w * (far(th[i]) - far(th[i - 1]));
    double t;
    if (std::isinf(th[i - 1])) t = th[i];
    else if (std::isinf(th[i])) t = th[i - 1];
    else t = th[i - 1] + w * (th[i] - th[i - 1]);
    return {rate, t};
  }
  return {1.0, kInf};  // unreachable: the +inf endpoint has d = 1
}

double fr_at_zero_fa(const ScoreSet& scores) {
  if (scores.target_scores.empty()) throw DataError("need at least one target score");
  if (scores.nontarget_scores.empty()) return 0.0;
  Sorted s(scores);
  const double top = s.non.back();
  const auto rejected = static_cast<std::size_t>(
      std::upper_bound(s.tgt.begin(), s.tgt.end(), top) - s.tgt.begin());
  return static_cast<double>(rejected) / static_cast<double>(s.tgt.size());
}

double relative_improvement(double baseline_eer, double new_eer) {
  if (!(baseline_eer > 0.0))
    throw DomainError("relative improvement needs a positive baseline, got " +
                      format_real(baseline_eer));
  return 100.0 * (baseline_eer - new_eer) / baseline_eer;
}

void write_det_csv(const std::filesystem::path& path, const DetCurve& curve) {
  std::string out = "threshold,fa_per_hour,fr_rate\n";
  for (const DetPoint& p : curve.points)
    out += format_real(p.threshold) + "," + format_real(p.fa_per_hour) + "," +
           format_real(p.fr_rate) + "\n";
  write_text_file(path, out);
}

}  // namespace mtl
