// mtl/tests/test_speaker.cc

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

#include <cmath>
#include <random>

#include <doctest.h>

#include "mtl/errors.h"
#include "mtl/model.h"
#include "mtl/speaker.h"
#include "test_support.h"

using namespace mtl;

namespace {

Embedding random_embedding(std::mt19937_64& rng, std::size_t n = 128) {
  std::normal_distribution<double> d(0.0, 1.0);
  Embedding e(n);
  for (double& v : e) v = d(rng);
  return e;
}

Embedding scaled(Embedding e, double k) {
  for (double& v : e) v *= k;
  return e;
}

ModelConfig tiny(Task task, int tied) {
  ModelConfig c;
  c.task = task;
  c.tied_layers = tied;
  c.hidden_units = 3;
  c.input_dim = 5;
  c.phone_vocab = 4;
  c.num_speakers = 3;
  c.attn_hidden = 3;
  c.init_seed = 2;
  return c;
}

}  // namespace

TEST_CASE("cosine score fixtures") {
  const Embedding a{1.0, 2.0, 3.0}, orth{3.0, 0.0, -1.0}, b{2.0, -1.0, 0.0};
  CHECK(cosine_score(a, SpeakerProfile{"s", {a}}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_score(a, SpeakerProfile{"s", {orth}}) == doctest::Approx(0.0));
  CHECK(cosine_score(a, SpeakerProfile{"s", {a, orth}}) == doctest::Approx(0.5));
  CHECK(cosine_similarity(a, b) == 0.0);
}

TEST_CASE("cosine score errors") {
  const Embedding a{1.0, 2.0}, zero{0.0, 0.0};
  CHECK_THROWS_AS(cosine_score(a, SpeakerProfile{"s", {zero}}), DomainError);
  CHECK_THROWS_AS(cosine_score(zero, SpeakerProfile{"s", {a}}), DomainError);
  CHECK_THROWS_AS(cosine_score(a, SpeakerProfile{"s", {}}), DataError);
  CHECK_THROWS_AS(cosine_similarity(a, Embedding{1.0}), DimensionError);
}

TEST_CASE("cosine score is invariant to positive scaling") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Embedding t = random_embedding(rng);
    SpeakerProfile p{"s", {random_embedding(rng), random_embedding(rng), random_embedding(rng)}};
    const double base = cosine_score(t, p);
    const double k = std::exp(std::uniform_real_distribution<double>(-5, 5)(rng));
    CHECK(std::abs(cosine_score(scaled(t, k), p) - base) < 1e-12);
    p.enrolment[1] = scaled(p.enrolment[1], k);
    CHECK(std::abs(cosine_score(t, p) - base) < 1e-12);
  }
}

TEST_CASE("the averaged score lies within the per-enrolment range") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Embedding t = random_embedding(rng, 8);
    SpeakerProfile p{"s", {}};
    const int n = 1 + trial % 6;
    double lo = 2.0, hi = -2.0;
    for (int i = 0; i < n; ++i) {
      p.enrolment.push_back(random_embedding(rng, 8));
      const double c = cosine_similarity(t, p.enrolment.back());
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    const double s = cosine_score(t, p);
    CHECK(s >= lo - 1e-15);
    CHECK(s <= hi + 1e-15);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("t-norm fixtures") {
  const TnormStats st{0.5, std::sqrt(0.5)};
  CHECK(tnorm(1.0, st) == doctest::Approx(0.5 / std::sqrt(0.5)));
  CHECK(tnorm(1.0, st) == doctest::Approx(0.7071).epsilon(1e-4));
  CHECK(tnorm(0.5, st) == 0.0);
  CHECK_THROWS_AS(tnorm(1.0, TnormStats{0.5, 0.0}), DomainError);
}

TEST_CASE("t-norm cohort statistics use the sample deviation") {
  // Cohort profiles at cosines 0 and 1 to the test vector.
  const Embedding t{1.0, 0.0};
  const TnormCohort cohort{{SpeakerProfile{"c0", {{0.0, 1.0}}}, SpeakerProfile{"c1", {{2.0, 0.0}}}}};
  const TnormStats st = tnorm_stats(t, cohort);
  CHECK(st.mean == doctest::Approx(0.5));
  CHECK(st.stddev == doctest::Approx(std::sqrt(0.5)));
  CHECK(tnorm(1.0, t, cohort) == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(tnorm(st.mean, t, cohort) == 0.0);
  const TnormCohort one{{cohort.profiles[0]}};
  CHECK_THROWS_AS(tnorm_stats(t, one), ConfigError);
  const TnormCohort flat{{cohort.profiles[0], cohort.profiles[0]}};
  CHECK_THROWS_AS(tnorm(1.0, t, flat), DomainError);
}

TEST_CASE("t-norm preserves the order of trials for one test vector") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Embedding t = random_embedding(rng, 16);
    TnormCohort cohort;
    for (int i = 0; i < 5; ++i) cohort.profiles.push_back({"c", {random_embedding(rng, 16)}});
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a = u(rng), b = u(rng);
    if (a == b) continue;
    CHECK(((a < b) == (tnorm(a, t, cohort) < tnorm(b, t, cohort))));
  }
}

TEST_CASE("verification fixtures and monotonicity") {
  CHECK(verify(0.9, 0.5));
  CHECK_FALSE(verify(0.1, 0.5));
  CHECK(verify(0.5, 0.5));
  for (double s : {-1.0, -0.2, 0.0, 0.4, 1.0})
    for (double t = -1.5; t < 1.5; t += 0.01) CHECK((verify(s, t + 0.01) <= verify(s, t)));
}

TEST_CASE("embeddings are deterministic, 128-wide and ignore the trigger branch") {
  JointModel m(tiny(Task::kJoint, 2));
  std::mt19937_64 rng(4);
  FeatureSequence x;
  x.frames = mtl::testing::random_tensor({6, 5}, rng);
  const Embedding a = embed(x, m), b = embed(x, m);
  CHECK(a.size() == 128);
  CHECK(a == b);
  for (std::size_t i = 0; i < m.parameters().size(); ++i)
    if (param_group(m.parameters().names()[i]) == ParamGroup::kTrigger)
      for (double& v : m.parameters().at(i).values()) v *= -2.0;
  CHECK(embed(x, m) == a);
  CHECK_THROWS_AS(embed(x, JointModel(tiny(Task::kTrigger, 0))), ConfigError);
}

TEST_CASE("profile file round trip") {
  mtl::testing::TempDir dir("profiles");
  std::mt19937_64 rng(5);
  std::vector<SpeakerProfile> p{{"a", {random_embedding(rng, 4), random_embedding(rng, 4)}},
                                {"b", {random_embedding(rng, 4)}}};
  write_profiles(dir / "p.jsonl", p);
  const auto r = read_profiles(dir / "p.jsonl");
  REQUIRE(r.size() == 2);
  CHECK(r[0].speaker_id == "a");
  CHECK(r[0].enrolment == p[0].enrolment);
  CHECK(r[1].enrolment == p[1].enrolment);
}
