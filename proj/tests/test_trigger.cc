// mtl/tests/test_trigger.cc

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "mtl/errors.h"
#include "mtl/trigger.h"
#include "test_support.h"

using namespace mtl;
using mtl::testing::brute_force_ctc_log_prob;
using mtl::testing::random_logprobs;

namespace {

constexpr int kBlank = 3;

// One-hot rows, with the tiny mass elsewhere kept finite.
Tensor one_hot_rows(const std::vector<int>& path, std::size_t V) {
  Tensor t({path.size(), V}, kLogZero);
  for (std::size_t r = 0; r < path.size(); ++r) t(r, static_cast<std::size_t>(path[r])) = 0.0;
  return t;
}

Tensor append_blank_frame(const Tensor& lp, int blank) {
  Tensor out({lp.rows() + 1, lp.cols()}, kLogZero);
  std::copy(lp.data().begin(), lp.data().end(), out.data().begin());
  out(lp.rows(), static_cast<std::size_t>(blank)) = 0.0;
  return out;
}

}  // namespace

TEST_CASE("a certain alignment of the phrase scores zero") {
  const TriggerPhrase p{"abc", {0, 1, 2}};
  const TriggerScore s = score_trigger(one_hot_rows({3, 0, 0, 1, 3, 2}, 4), p, kBlank);
  CHECK(s.admissible);
  CHECK(s.log_prob == doctest::Approx(0.0));
  CHECK(s.normalized == doctest::Approx(0.0));
  CHECK(s.frames == 6);
}

TEST_CASE("score is the negated CTC loss and matches path enumeration") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = 3 + static_cast<std::size_t>(trial % 4);
    const Tensor lp = random_logprobs(T, 4, rng);
    const TriggerPhrase p{"p", {trial % 3, (trial + 1) % 3}};
    const TriggerScore s = score_trigger(lp, p, kBlank);
    CHECK(s.log_prob == -ctc_loss(lp, p.phones, kBlank).loss);
    CHECK(std::abs(s.log_prob - brute_force_ctc_log_prob(lp, p.phones, kBlank)) < 1e-8);
    CHECK(std::abs(s.normalized * static_cast<double>(s.frames) - s.log_prob) < 1e-12);
  }
}

TEST_CASE("appending a certain blank frame keeps log P and rescales the normalisation") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor lp = random_logprobs(5, 4, rng);
    const TriggerPhrase p{"p", {0, 2}};
    const TriggerScore a = score_trigger(lp, p, kBlank);
    const TriggerScore b = score_trigger(append_blank_frame(lp, kBlank), p, kBlank);
    CHECK(b.log_prob == doctest::Approx(a.log_prob).epsilon(1e-12));
    CHECK(b.frames == a.frames + 1);
    CHECK(b.normalized == doctest::Approx(a.log_prob / 6.0).epsilon(1e-12));
  }
}

TEST_CASE("an inadmissible phrase scores minus infinity") {
  const TriggerPhrase p{"long", {0, 1, 2, 0}};
  const TriggerScore s = score_trigger(Tensor({3, 4}, -std::log(4.0)), p, kBlank);
  CHECK_FALSE(s.admissible);
  CHECK(s.log_prob == -std::numeric_limits<double>::infinity());
  CHECK_FALSE(detect(s, -1e300));
  CHECK_THROWS_AS(score_trigger(Tensor({3, 4}), TriggerPhrase{"empty", {}}, kBlank), DataError);
}

TEST_CASE("detection fixtures") {
  TriggerScore s;
  s.normalized = -0.5;
  CHECK(detect(s, -1.0));
  s.normalized = -2.0;
  CHECK_FALSE(detect(s, -1.0));
  s.normalized = -1.0;
  CHECK(detect(s, -1.0));
}

TEST_CASE("detection is monotone in the threshold") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(-2.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TriggerScore> set(20);
    for (auto& s : set) s.normalized = n(rng);
    std::vector<double> thresholds{-std::numeric_limits<double>::infinity()};
    for (int k = 0; k < 30; ++k) thresholds.push_back(n(rng));
    thresholds.push_back(std::numeric_limits<double>::infinity());
    std::sort(thresholds.begin(), thresholds.end());
    for (const auto& s : set) {
      CHECK(detect(s, thresholds.front()));
      CHECK_FALSE(detect(s, thresholds.back()));
      for (std::size_t k = 1; k < thresholds.size(); ++k)
        CHECK((detect(s, thresholds[k]) <= detect(s, thresholds[k - 1])));
    }
  }
}

TEST_CASE("windowed scoring covers the whole recording") {
  std::mt19937_64 rng(4);
  const TriggerPhrase p{"p", {0, 1}};
  const Tensor lp = random_logprobs(50, 4, rng);
  const auto w = score_windows(lp, p, kBlank, 20, 20);
  REQUIRE(w.size() == 3);  // [0,20), [20,40), [30,50)
  Tensor tail({20, 4});
  std::copy_n(lp.data().begin() + 30 * 4, 80, tail.data().begin());
  CHECK(w[2].log_prob == score_trigger(tail, p, kBlank).log_prob);
  CHECK(score_windows(lp, p, kBlank, 10, 10).size() == 5);
  CHECK(score_windows(lp, p, kBlank, 60, 10).size() == 1);
  CHECK_THROWS_AS(score_windows(lp, p, kBlank, 0, 1), ConfigError);
}
