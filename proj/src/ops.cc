// mtl/ops.cc

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

#include "mtl/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "mtl/errors.h"

namespace mtl {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

ConstMap as_matrix(std::span<const double> d, std::size_t r, std::size_t c) {
  return ConstMap(d.data(), static_cast<Eigen::Index>(r),
                  static_cast<Eigen::Index>(c));
}

MutMap as_matrix(std::span<double> d, std::size_t r, std::size_t c) {
  return MutMap(d.data(), static_cast<Eigen::Index>(r),
                static_cast<Eigen::Index>(c));
}

void require_rank2(const Tensor& t, const char* what) {
  if (t.rank() != 2)
    throw DimensionError(std::string(what) + " needs a matrix, got " +
                         shape_to_string(t.shape()));
}

double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a.cols() != b.rows())
    throw DimensionError("matmul inner dimensions disagree: " +
                         shape_to_string(a.shape()) + " x " +
                         shape_to_string(b.shape()));
  Tensor out({a.rows(), b.cols()});
  as_matrix(out.data(), a.rows(), b.cols()).noalias() =
      as_matrix(a.data(), a.rows(), a.cols()) *
      as_matrix(b.data(), b.rows(), b.cols());
  return out;
}

Tensor log_softmax(const Tensor& x) {
  Tensor out(x.shape());
  const std::size_t v = x.shape().back();
  const std::size_t rows = x.size() / v;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.data().data() + r * v;
    double* o = out.data().data() + r * v;
    const double m = *std::max_element(in, in + v);
    double s = 0.0;
    for (std::size_t j = 0; j < v; ++j) s += std::exp(in[j] - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < v; ++j) o[j] = in[j] - lse;
  }
  return out;
}

Var elementwise(ElementwiseOp op, Var a) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  auto in = x.data();
  auto o = out.data();
  switch (op) {
    case ElementwiseOp::kSigmoid:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = sigmoid_value(in[i]);
      break;
    case ElementwiseOp::kTanh:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::tanh(in[i]);
      break;
    case ElementwiseOp::kExp:
      for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::exp(in[i]);
      break;
    case ElementwiseOp::kLog:
      for (std::size_t i = 0; i < o.size(); ++i) {
        if (!(in[i] > 0.0))
          throw DomainError("log of nonpositive value " + std::to_string(in[i]) +
                            " at index " + std::to_string(i));
        o[i] = std::log(in[i]);
      }
      break;
    default:
      throw Error("binary elementwise op applied to one operand");
  }
  const std::size_t ia = a.id();
  // Output values are recovered from the tape node itself, so the closure
  // only needs to remember ids.
  Tape& tape = *a.tape();
  const std::size_t out_id = tape.size();
  return tape.record(std::move(out), {a},
                     [op, ia, out_id](Tape& t, std::span<const double> g) {
                       auto ga = t.adjoint(ia);
                       auto x = t.value(ia).data();
                       auto y = t.value(out_id).data();
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         switch (op) {
                           case ElementwiseOp::kSigmoid:
                             ga[i] += g[i] * y[i] * (1.0 - y[i]);
                             break;
                           case ElementwiseOp::kTanh:
                             ga[i] += g[i] * (1.0 - y[i] * y[i]);
                             break;
                           case ElementwiseOp::kExp:
                             ga[i] += g[i] * y[i];
                             break;
                           default:
                             ga[i] += g[i] / x[i];
                             break;
                         }
                       }
                     });
}

Var elementwise(ElementwiseOp op, Var a, Var b) {
  if (op != ElementwiseOp::kAdd && op != ElementwiseOp::kMul)
    throw Error("unary elementwise op applied to two operands");
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const bool same = x.shape() == y.shape();
  const bool a_scalar = x.size() == 1 && !same;
  const bool b_scalar = y.size() == 1 && !same;
  if (!same && !a_scalar && !b_scalar)
    throw DimensionError("elementwise operands do not broadcast: " +
                         shape_to_string(x.shape()) + " vs " +
                         shape_to_string(y.shape()));
  const Shape& shape = a_scalar ? y.shape() : x.shape();
  Tensor out(shape);
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double xi = a_scalar ? x[0] : x[i];
    const double yi = b_scalar ? y[0] : y[i];
    o[i] = op == ElementwiseOp::kAdd ? xi + yi : xi * yi;
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(
      std::move(out), {a, b},
      [op, ia, ib, a_scalar, b_scalar](Tape& t, std::span<const double> g) {
        auto xv = t.value(ia).data();
        auto yv = t.value(ib).data();
        if (t.requires_grad(ia)) {
          auto ga = t.adjoint(ia);
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double d =
                op == ElementwiseOp::kAdd ? g[i] : g[i] * (b_scalar ? yv[0] : yv[i]);
            ga[a_scalar ? 0 : i] += d;
          }
        }
        if (t.requires_grad(ib)) {
          auto gb = t.adjoint(ib);
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double d =
                op == ElementwiseOp::kAdd ? g[i] : g[i] * (a_scalar ? xv[0] : xv[i]);
            gb[b_scalar ? 0 : i] += d;
          }
        }
      });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {a},
                          [ia, factor](Tape& t, std::span<const double> g) {
                            auto ga = t.adjoint(ia);
                            for (std::size_t i = 0; i < g.size(); ++i)
                              ga[i] += factor * g[i];
                          });
}

Var matmul(Var a, Var b) {
  Tensor out = matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  const std::size_t m = a.value().rows(), k = a.value().cols(),
                    n = b.value().cols();
  return a.tape()->record(
      std::move(out), {a, b}, [ia, ib, m, k, n](Tape& t, std::span<const double> g) {
        auto gm = as_matrix(g, m, n);
        if (t.requires_grad(ia))
          as_matrix(t.adjoint(ia), m, k).noalias() +=
              gm * as_matrix(t.value(ib).data(), k, n).transpose();
        if (t.requires_grad(ib))
          as_matrix(t.adjoint(ib), k, n).noalias() +=
              as_matrix(t.value(ia).data(), m, k).transpose() * gm;
      });
}

Var affine(Var x, Var w, Var bias) {
  Tensor out = matmul(x.value(), w.value());
  const std::size_t m = out.rows(), n = out.cols(), k = x.value().cols();
  if (bias.value().size() != n)
    throw DimensionError("affine bias " + shape_to_string(bias.shape()) +
                         " does not match output width " + std::to_string(n));
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out(r, c) += bias.value()[c];
  const std::size_t ix = x.id(), iw = w.id(), ib = bias.id();
  return x.tape()->record(
      std::move(out), {x, w, bias},
      [ix, iw, ib, m, k, n](Tape& t, std::span<const double> g) {
        auto gm = as_matrix(g, m, n);
        if (t.requires_grad(ix))
          as_matrix(t.adjoint(ix), m, k).noalias() +=
              gm * as_matrix(t.value(iw).data(), k, n).transpose();
        if (t.requires_grad(iw))
          as_matrix(t.adjoint(iw), k, n).noalias() +=
              as_matrix(t.value(ix).data(), m, k).transpose() * gm;
        if (t.requires_grad(ib))
          as_matrix(t.adjoint(ib), 1, n).noalias() += gm.colwise().sum();
      });
}

Var transpose(Var a) {
  const Tensor& x = a.value();
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out(j, i) = x[i * c + j];
  const std::size_t ia = a.id();
  return a.tape()->record(std::move(out), {a},
                          [ia, r, c](Tape& t, std::span<const double> g) {
                            auto ga = t.adjoint(ia);
                            for (std::size_t i = 0; i < r; ++i)
                              for (std::size_t j = 0; j < c; ++j)
                                ga[i * c + j] += g[j * r + i];
                          });
}

Var log_softmax(Var x) {
  Tensor out = log_softmax(x.value());
  const std::size_t ix = x.id();
  const std::size_t v = out.shape().back();
  const std::size_t out_id = x.tape()->size();
  return x.tape()->record(
      std::move(out), {x}, [ix, v, out_id](Tape& t, std::span<const double> g) {
        auto gx = t.adjoint(ix);
        auto y = t.value(out_id).data();
        const std::size_t rows = g.size() / v;
        for (std::size_t r = 0; r < rows; ++r) {
          double gs = 0.0;
          for (std::size_t j = 0; j < v; ++j) gs += g[r * v + j];
          for (std::size_t j = 0; j < v; ++j)
            gx[r * v + j] += g[r * v + j] - std::exp(y[r * v + j]) * gs;
        }
      });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  return a.tape()->record(Tensor::scalar(s), {a},
                          [ia](Tape& t, std::span<const double> g) {
                            for (double& d : t.adjoint(ia)) d += g[0];
                          });
}

Var select(Var a, std::size_t index) {
  if (index >= a.value().size())
    throw DimensionError("select index " + std::to_string(index) +
                         " out of range for " + shape_to_string(a.shape()));
  const std::size_t ia = a.id();
  return a.tape()->record(Tensor::scalar(a.value()[index]), {a},
                          [ia, index](Tape& t, std::span<const double> g) {
                            t.adjoint(ia)[index] += g[0];
                          });
}

}  // namespace mtl
