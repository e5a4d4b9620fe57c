// mtl/speaker.h

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

#ifndef MTL_SPEAKER_H_
#define MTL_SPEAKER_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtl/features.h"
#include "mtl/model.h"

namespace mtl {

using Embedding = std::vector<double>;

struct SpeakerProfile {
  std::string speaker_id;
  std::vector<Embedding> enrolment;  // N >= 1, each nonzero
};

struct TrialScore {
  std::string test_id;
  std::string claimed_speaker;
  double raw = 0.0;
  std::optional<double> normalized;
  bool is_target = false;
};

// Impostor profiles used to estimate t-norm statistics. At least two, and
// disjoint from the trial speakers.
struct TnormCohort {
  std::vector<SpeakerProfile> profiles;
};

// Speaker embedding (the projection output; the classifier is not used).
Embedding embed(const FeatureSequence& x, const JointModel& model);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Mean cosine similarity between `test` and each enrolment embedding.
// Throws DomainError on a zero-norm vector.
double cosine_score(std::span<const double> test, const SpeakerProfile& profile);

struct TnormStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) standard deviation
};

// Statistics of the test embedding's scores against each cohort profile.
TnormStats tnorm_stats(std::span<const double> test, const TnormCohort& cohort);

// (raw - mean) / stddev over the cohort scores. DomainError when the cohort
// scores have zero spread, ConfigError for fewer than two cohort profiles.
double tnorm(double raw, std::span<const double> test, const TnormCohort& cohort);
double tnorm(double raw, const TnormStats& stats);

inline bool verify(double score, double threshold) { return score >= threshold; }

// Profile store: one JSON object per line, {speaker_id, embeddings: [[...]]}.
void write_profiles(const std::filesystem::path& path, const std::vector<SpeakerProfile>& profiles);
std::vector<SpeakerProfile> read_profiles(const std::filesystem::path& path);

}  // namespace mtl

#endif  // MTL_SPEAKER_H_
