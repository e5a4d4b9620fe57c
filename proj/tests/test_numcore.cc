// mtl/tests/test_numcore.cc

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
#include <cstring>
#include <limits>

#include <doctest.h>

#include "mtl/adam.h"
#include "mtl/errors.h"
#include "mtl/ops.h"
#include "mtl/params.h"
#include "mtl/tape.h"
#include "test_support.h"

using namespace mtl;
using mtl::testing::gradient_relative_error;
using mtl::testing::random_tensor;

TEST_CASE("tensor shape invariants") {
  Tensor t({2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  CHECK_FALSE(t.has_grad());
  CHECK(t.grad().size() == 6);
  CHECK(t.has_grad());
  t.grad()[0] = 3.0;
  t.zero_grad();
  CHECK(t.grad()[0] == 0.0);
  CHECK(t.reshaped({3, 2}).cols() == 2);
  CHECK_THROWS_AS(t.reshaped({4, 2}), DimensionError);
}

TEST_CASE("matmul fixtures") {
  const Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  const Tensor col = Tensor::matrix(2, 1, {3, 4});
  CHECK(matmul(eye, col) == col);
  const Tensor r = matmul(Tensor::matrix(1, 2, {1, 2}), col);
  CHECK(r.item() == 11.0);
}

TEST_CASE("matmul shape mismatch names both shapes") {
  try {
    matmul(Tensor({2, 3}), Tensor({2, 3}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
}

TEST_CASE("matmul gradient matches finite differences") {
  std::mt19937_64 rng(11);
  auto f = [](Tape&, const std::vector<Var>& v) { return sum(matmul(v[0], v[1])); };
  auto g = [](Tape&, const std::vector<Var>& v) {
    Var p = matmul(v[0], v[1]);
    return sum(mul(p, p));
  };
  CHECK(gradient_relative_error(f, {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)}) <
        1e-6);
  CHECK(gradient_relative_error(g, {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)}) <
        1e-6);
}

TEST_CASE("elementwise fixtures") {
  Tape tape;
  Var z = tape.constant(Tensor::scalar(0.0));
  CHECK(sigmoid(z).value().item() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mtl::tanh(z).value().item() == 0.0);
  CHECK_THROWS_AS(mtl::log(tape.constant(Tensor::vector({1.0, 0.0}))), DomainError);
  CHECK_THROWS_AS(mtl::log(tape.constant(Tensor::vector({-1.0}))), DomainError);
  CHECK_THROWS_AS(add(tape.constant(Tensor({2, 3})), tape.constant(Tensor({3, 2}))),
                  DimensionError);
  // Scalar broadcasting on either side.
  Var b = add(tape.constant(Tensor::scalar(1.0)), tape.constant(Tensor::vector({1, 2})));
  CHECK(b.value()[1] == 3.0);
}

TEST_CASE("elementwise gradients match finite differences") {
  std::mt19937_64 rng(5);
  const ElementwiseOp unary[] = {ElementwiseOp::kSigmoid, ElementwiseOp::kTanh,
                                 ElementwiseOp::kExp};
  for (ElementwiseOp op : unary) {
    auto f = [op](Tape&, const std::vector<Var>& v) {
      return sum(mul(elementwise(op, v[0]), v[1]));
    };
    CHECK(gradient_relative_error(f, {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}) <
          1e-6);
  }
  auto lg = [](Tape&, const std::vector<Var>& v) { return sum(mtl::log(v[0])); };
  CHECK(gradient_relative_error(lg, {random_tensor({2, 3}, rng, 0.5, 2.0)}) < 1e-6);
  auto bc = [](Tape&, const std::vector<Var>& v) { return sum(mul(add(v[0], v[1]), v[1])); };
  CHECK(gradient_relative_error(bc, {random_tensor({1}, rng), random_tensor({2, 3}, rng)}) <
        1e-6);
}

TEST_CASE("log_softmax fixtures") {
  const Tensor u = log_softmax(Tensor::matrix(1, 3, {0, 0, 0}));
  for (double v : u.data()) CHECK(v == doctest::Approx(-std::log(3.0)).epsilon(1e-15));
  const Tensor big = log_softmax(Tensor::matrix(1, 2, {1000, 0}));
  for (double v : big.data()) CHECK(std::isfinite(v));
  CHECK(std::exp(big[0]) + std::exp(big[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log_softmax rows exponentiate to one, including magnitude 1e3") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor x = random_tensor({4, 7}, rng, -1000.0, 1000.0);
    const Tensor y = log_softmax(x);
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (std::size_t k = 0; k < 7; ++k) s += std::exp(y(r, k));
      CHECK(std::abs(s - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("log_softmax gradient matches finite differences") {
  std::mt19937_64 rng(17);
  auto f = [](Tape&, const std::vector<Var>& v) { return sum(mul(log_softmax(v[0]), v[1])); };
  CHECK(gradient_relative_error(f, {random_tensor({4, 5}, rng), random_tensor({4, 5}, rng)}) <
        1e-5);
}

TEST_CASE("affine, transpose, scale and select gradients") {
  std::mt19937_64 rng(23);
  auto f = [](Tape&, const std::vector<Var>& v) {
    Var a = affine(v[0], v[1], v[2]);
    return sum(mul(scale(transpose(a), 0.7), transpose(a)));
  };
  CHECK(gradient_relative_error(f, {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng),
                                    random_tensor({2}, rng)}) < 1e-6);
  auto s = [](Tape&, const std::vector<Var>& v) {
    return mul(select(v[0], 4), select(v[0], 1));
  };
  CHECK(gradient_relative_error(s, {random_tensor({2, 3}, rng)}) < 1e-6);
}

TEST_CASE("forward evaluation is bitwise repeatable") {
  std::mt19937_64 rng(29);
  const Tensor a = random_tensor({5, 6}, rng), b = random_tensor({6, 3}, rng);
  auto run = [&] {
    Tape tape;
    return log_softmax(mtl::tanh(matmul(tape.constant(a), tape.constant(b)))).value();
  };
  CHECK(run() == run());
}

TEST_CASE("gradients accumulate across uses of the same input") {
  Tape tape;
  Var x = tape.variable(Tensor::scalar(3.0));
  Var y = add(mul(x, x), x);  // dy/dx = 2x + 1
  tape.backward(y);
  CHECK(tape.gradient(x)[0] == 7.0);
  Var c = tape.constant(Tensor::scalar(2.0));
  Var z = mul(c, x);
  tape.backward(z);
  CHECK(tape.gradient(x)[0] == 2.0);
  CHECK(tape.gradient(c)[0] == 0.0);
}

namespace {

ParameterSet one_scalar(double v) {
  ParameterSet p;
  p.add("w", Tensor::scalar(v));
  return p;
}

}  // namespace

TEST_CASE("adam first step moves by about lr") {
  ParameterSet p = one_scalar(1.0);
  GradientSet g(p);
  g.at(0)[0] = 1.0;
  AdamState st(p, AdamOptions{0.1, 0.9, 0.999, 1e-8});
  adam_step(p, g, st);
  // Reference recurrence: m = 0.1, v = 0.001, m_hat = 1, v_hat = 1.
  const double expected = 1.0 - 0.1 * 1.0 / (1.0 + 1e-8);
  CHECK(p.at(0)[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(st.step == 1);
}

TEST_CASE("adam matches a hand-rolled reference over several steps") {
  ParameterSet p = one_scalar(0.5);
  AdamOptions o{0.01, 0.9, 0.999, 1e-8};
  AdamState st(p, o);
  double x = 0.5, m = 0.0, v = 0.0;
  const double gs[] = {0.3, -1.2, 0.7, 2.0, -0.1};
  int t = 0;
  for (double gv : gs) {
    GradientSet g(p);
    g.at(0)[0] = gv;
    adam_step(p, g, st);
    ++t;
    m = o.beta1 * m + (1 - o.beta1) * gv;
    v = o.beta2 * v + (1 - o.beta2) * gv * gv;
    const double mh = m / (1 - std::pow(o.beta1, t)), vh = v / (1 - std::pow(o.beta2, t));
    x -= o.lr * mh / (std::sqrt(vh) + o.eps);
    CHECK(p.at(0)[0] == doctest::Approx(x).epsilon(1e-13));
  }
  CHECK(st.step == 5);
}

TEST_CASE("adam leaves parameters unchanged under zero gradient") {
  ParameterSet p;
  p.add("a", Tensor::matrix(2, 2, {1, -2, 3, 4}));
  const Tensor before = p.at(0);
  GradientSet g(p);
  AdamState st(p, {});
  adam_step(p, g, st);
  CHECK(p.at(0) == before);
}

TEST_CASE("adam is deterministic") {
  auto run = [] {
    ParameterSet p = one_scalar(0.25);
    GradientSet g(p);
    g.at(0)[0] = 0.123456789;
    AdamState st(p, {});
    adam_step(p, g, st);
    adam_step(p, g, st);
    return p.at(0)[0];
  };
  const double a = run(), b = run();
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("adam rejects NaN gradients without mutating anything") {
  ParameterSet p;
  p.add("layer.w", Tensor::vector({1.0, 2.0}));
  GradientSet g(p);
  g.at(0)[1] = std::numeric_limits<double>::quiet_NaN();
  AdamState st(p, {});
  try {
    adam_step(p, g, st);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("layer.w") != std::string::npos);
  }
  CHECK(p.at(0)[0] == 1.0);
  CHECK(st.step == 0);
  CHECK(st.m[0][0] == 0.0);
}

TEST_CASE("adam state stays congruent with the parameter set") {
  ParameterSet p;
  p.add("a", Tensor({2, 3}));
  p.add("b", Tensor({4}));
  AdamState st(p, {});
  REQUIRE(st.m.size() == 2);
  CHECK(st.m[0].size() == 6);
  CHECK(st.v[1].size() == 4);
  ParameterSet other;
  other.add("a", Tensor({2, 3}));
  GradientSet g(other);
  CHECK_THROWS(adam_step(p, g, st));
}
