// mtl/tests/test_corpus.cc

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
#include <set>

#include <doctest.h>

#include "mtl/corpus.h"
#include "mtl/errors.h"
#include "mtl/features.h"
#include "test_support.h"

using namespace mtl;
using mtl::testing::small_corpus_spec;
using mtl::testing::snapshot;
using mtl::testing::TempDir;

TEST_CASE("the same spec twice gives byte-identical corpora") {
  TempDir a("corpus_a"), b("corpus_b");
  const SyntheticSpec s = small_corpus_spec();
  generate(s, a.path());
  generate(s, b.path());
  const auto sa = snapshot(a.path()), sb = snapshot(b.path());
  CHECK(sa.size() > 10);
  CHECK(sa == sb);
  SyntheticSpec other = s;
  other.seed = s.seed + 1;
  TempDir c("corpus_c");
  generate(other, c.path());
  CHECK(snapshot(c.path()) != sa);
}

TEST_CASE("noise-free frames decode to their phones with a nearest-template classifier") {
  SyntheticSpec s;
  s.noise_level = 0.0;
  const Tensor templates = phone_templates(s);
  REQUIRE(templates.rows() == static_cast<std::size_t>(s.num_phones + 1));
  Voice plain;
  plain.gain.assign(kNumMelBands, 1.0);
  plain.offset.assign(kNumMelBands, 0.0);
  std::mt19937_64 rng(5);
  const PhoneSequence phones{2, 5, 1, 6, 0, 8, 3, 7, 4};
  std::vector<int> truth;
  const Tensor x = render(s, templates, plain, phones, rng, &truth);
  std::vector<int> decoded;
  for (std::size_t t = 0; t < x.rows(); ++t) {
    int best = -1;
    double best_d = 1e300;
    for (std::size_t p = 0; p < templates.rows(); ++p) {
      double d = 0.0;
      for (std::size_t b = 0; b < kNumMelBands; ++b) d += std::pow(x(t, b) - templates(p, b), 2);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(p);
      }
    }
    decoded.push_back(best);
  }
  CHECK(decoded == truth);
  PhoneSequence collapsed;
  for (int p : decoded)
    if (collapsed.empty() || collapsed.back() != p) collapsed.push_back(p);
  CHECK(collapsed == phones);
}

TEST_CASE("phone templates are distinct") {
  const Tensor t = phone_templates(SyntheticSpec{});
  for (std::size_t a = 0; a < t.rows(); ++a)
    for (std::size_t b = a + 1; b < t.rows(); ++b) {
      double d = 0.0;
      for (std::size_t k = 0; k < t.cols(); ++k) d += std::abs(t(a, k) - t(b, k));
      CHECK(d > 1.0);
    }
}

TEST_CASE("generated corpus: label disjointness, expansion and consistency") {
  TempDir dir("corpus_props");
  const SyntheticSpec s = small_corpus_spec(9);
  const CorpusSummary sum = generate(s, dir.path());
  const CorpusLayout layout{dir.path()};
  const Manifest train = read_manifest(layout.train());
  CHECK(static_cast<int>(train.size()) == s.training_utterances());
  CHECK(sum.speaker_segments == 3 * sum.speaker_base);
  CHECK(sum.speaker_base == s.base_speaker_utterances());
  std::set<std::string> ids, phonetic_ids, speaker_ids;
  std::map<SegmentKind, int> per_kind;
  for (const Utterance& u : train) {
    CHECK(ids.insert(u.id).second);
    if (u.label_kind == LabelKind::kPhonetic) {
      CHECK_FALSE(u.phones.empty());
      CHECK(u.speaker.empty());
      phonetic_ids.insert(u.id);
      for (int p : u.phones) CHECK((p >= 0 && p < s.num_phones));
    } else {
      CHECK(u.phones.empty());
      CHECK_FALSE(u.speaker.empty());
      speaker_ids.insert(u.id);
      ++per_kind[u.segment_kind];
    }
    const FeatureSequence f = read_features(resolve(dir.path(), u.feature_path));
    CHECK(f.duration_s() == doctest::Approx(u.duration_s));
  }
  CHECK(static_cast<int>(phonetic_ids.size()) == s.num_phonetic);
  CHECK(static_cast<int>(speaker_ids.size()) == 3 * s.base_speaker_utterances());
  for (SegmentKind k : {SegmentKind::kTrigger, SegmentKind::kPayload, SegmentKind::kFull})
    CHECK(per_kind[k] == s.base_speaker_utterances());

  // Held-out material never reuses a training speaker.
  std::set<std::string> train_speakers;
  for (const Utterance& u : train)
    if (u.label_kind == LabelKind::kSpeaker) train_speakers.insert(u.speaker);
  for (const auto& path : {layout.enrol(), layout.test(), layout.cohort()})
    for (const Utterance& u : read_manifest(path)) CHECK(train_speakers.count(u.speaker) == 0);

  // Trigger trials: positives and negatives as requested, negatives never the phrase.
  int pos = 0, neg = 0;
  for (const Utterance& u : read_manifest(layout.trigger_trials())) {
    REQUIRE(u.is_positive.has_value());
    if (*u.is_positive) {
      ++pos;
      CHECK(u.phones == s.phrase.phones);
    } else {
      ++neg;
      CHECK(u.phones != s.phrase.phones);
    }
  }
  CHECK(pos == s.trigger_positives);
  CHECK(neg == s.trigger_negatives);

  // Full cross of tests and held-out speakers.
  const auto trials = read_trials(layout.trials());
  CHECK(static_cast<int>(trials.size()) == sum.test * s.eval_speakers);
  CHECK(read_corpus_spec(layout).to_json() == s.to_json());
}

TEST_CASE("manifest and trial round trips") {
  TempDir dir("manifest");
  Manifest m;
  Utterance a;
  a.id = "ph1";
  a.feature_path = "features/ph1.mtlf";
  a.phones = {1, 2, 3};
  a.duration_s = 0.33;
  Utterance b;
  b.id = "spk1";
  b.feature_path = "features/spk1.mtlf";
  b.label_kind = LabelKind::kSpeaker;
  b.speaker = "spk007";
  b.segment_kind = SegmentKind::kPayload;
  b.duration_s = 1.0 / 3.0;
  Utterance c = a;
  c.id = "trig1";
  c.is_positive = false;
  m = {a, b, c};
  write_manifest(dir / "m.jsonl", m);
  CHECK(read_manifest(dir / "m.jsonl") == m);

  std::vector<SpeakerTrial> t{{"x", "features/x.mtlf", "s1", true, SegmentKind::kTrigger},
                              {"x", "features/x.mtlf", "s2", false, SegmentKind::kTrigger}};
  write_trials(dir / "t.jsonl", t);
  CHECK(read_trials(dir / "t.jsonl") == t);
}

TEST_CASE("manifest rows carrying both label kinds are rejected") {
  Json j = to_json(Utterance{"x", "f", LabelKind::kPhonetic, {1}, "", SegmentKind::kFull, 1.0, {}});
  j["speaker"] = "s";
  CHECK_THROWS_AS(utterance_from_json(j), DataError);
  CHECK_THROWS_AS(label_kind_from_string("both"), DataError);
}

TEST_CASE("spec validation") {
  SyntheticSpec s;
  s.phrase.phones = {2, 9};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = SyntheticSpec{};
  s.noise_level = -1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  TempDir dir("bad_spec");
  CHECK_THROWS_AS(generate(s, dir.path()), ConfigError);
  CHECK(SyntheticSpec::from_json(SyntheticSpec{}.to_json()).to_json() == SyntheticSpec{}.to_json());
  CHECK(SyntheticSpec{}.training_utterances() >= 2000);
}

namespace {

Manifest numbered(std::size_t n, std::size_t phonetic) {
  Manifest m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m[i].id = "u" + std::to_string(i);
    m[i].label_kind = i < phonetic ? LabelKind::kPhonetic : LabelKind::kSpeaker;
  }
  return m;
}

}  // namespace

TEST_CASE("256 utterances in batches of 128 make two batches covering each id once") {
  const Manifest m = numbered(256, 128);
  const BatchPlan p = schedule(m, 128, 1, 0);
  REQUIRE(p.batches.size() == 2);
  std::multiset<std::string> seen;
  for (const auto& b : p.batches) {
    CHECK(b.size() == 128);
    seen.insert(b.begin(), b.end());
  }
  CHECK(seen.size() == 256);
  for (const auto& u : m) CHECK(seen.count(u.id) == 1);
  CHECK(schedule(m, 100, 1, 0).batches.back().size() == 56);
}

TEST_CASE("plans are reshuffled per epoch and reproducible") {
  const Manifest m = numbered(256, 128);
  CHECK(schedule(m, 128, 1, 0).batches != schedule(m, 128, 1, 1).batches);
  CHECK(schedule(m, 128, 1, 3).batches == schedule(m, 128, 1, 3).batches);
  CHECK(schedule(m, 128, 2, 3).batches != schedule(m, 128, 1, 3).batches);
  CHECK_THROWS_AS(schedule(m, 0, 1, 0), ConfigError);
  CHECK_THROWS_AS(schedule(Manifest{}, 8, 1, 0), DataError);
}

TEST_CASE("batches inherit the corpus task proportions") {
  const Manifest m = numbered(1024, 512);
  std::set<std::string> phonetic;
  for (const auto& u : m)
    if (u.label_kind == LabelKind::kPhonetic) phonetic.insert(u.id);
  double total = 0.0;
  int batches = 0;
  for (int epoch = 0; epoch < 100; ++epoch)
    for (const auto& b : schedule(m, 128, 7, epoch).batches) {
      double n = 0;
      for (const auto& id : b) n += phonetic.count(id);
      total += n / static_cast<double>(b.size());
      ++batches;
    }
  CHECK(std::abs(total / batches - 0.5) <= 0.05);
}
