// mtl/speaker.cc

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

#include "mtl/speaker.h"

#include <cmath>

#include "mtl/errors.h"
#include "mtl/io.h"

namespace mtl {

Embedding embed(const FeatureSequence& x, const JointModel& model) {
  if (!model.config().has_speaker_branch())
    throw ConfigError("embed: model has no speaker branch");
  return model.infer(x, kSpeakerBranch).embedding;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("cosine: embedding sizes differ (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine: degenerate zero-norm embedding");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine_score(std::span<const double> test, const SpeakerProfile& profile) {
  if (profile.enrolment.empty())
    throw DataError("speaker " + profile.speaker_id + " has no enrolment embeddings");
  double s = 0.0;
  for (const Embedding& e : profile.enrolment) s += cosine_similarity(test, e);
  return s / static_cast<double>(profile.enrolment.size());
}

TnormStats tnorm_stats(std::span<const double> test, const TnormCohort& cohort) {
  const std::size_t n = cohort.profiles.size();
  if (n < 2) throw ConfigError("t-norm cohort needs at least 2 profiles, got " + std::to_string(n));
  std::vector<double> scores;
  scores.reserve(n);
  for (const SpeakerProfile& p : cohort.profiles) scores.push_back(cosine_score(test, p));
  TnormStats st;
  for (double s : scores) st.mean += s;
  st.mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : scores) ss += (s - st.mean) * (s - st.mean);
  st.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  return st;
}

double tnorm(double raw, const TnormStats& stats) {
  if (!(stats.stddev > 0.0)) throw DomainError("t-norm: degenerate cohort, zero score spread");
  return (raw - stats.mean) / stats.stddev;
}

double tnorm(double raw, std::span<const double> test, const TnormCohort& cohort) {
  return tnorm(raw, tnorm_stats(test, cohort));
}

void write_profiles(const std::filesystem::path& path, const std::vector<SpeakerProfile>& profiles) {
  std::vector<Json> rows;
  for (const SpeakerProfile& p : profiles) {
    Json j;
    j["speaker_id"] = p.speaker_id;
    j["embeddings"] = p.enrolment;
    rows.push_back(std::move(j));
  }
  write_jsonl(path, rows);
}

std::vector<SpeakerProfile> read_profiles(const std::filesystem::path& path) {
  std::vector<SpeakerProfile> out;
  for (const Json& j : read_jsonl(path)) {
    try {
      SpeakerProfile p;
      p.speaker_id = j.at("speaker_id").get<std::string>();
      p.enrolment = j.at("embeddings").get<std::vector<Embedding>>();
      if (p.enrolment.empty())
        throw DataError("profile " + p.speaker_id + " has zero enrolments");
      out.push_back(std::move(p));
    } catch (const Json::exception& e) {
      throw DataError(path.string() + ": malformed profile: " + e.what());
    }
  }
  return out;
}

}  // namespace mtl
