// mtl/lstm.cc

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

#include "mtl/lstm.h"

#include <Eigen/Core>
#include <cmath>
#include <memory>

#include "mtl/errors.h"

namespace mtl {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

Eigen::Map<const RowMatrix> view(const Tensor& t, std::size_t r, std::size_t c) {
  return {t.data().data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)};
}

Eigen::Map<RowMatrix> view(std::span<double> d, std::size_t r, std::size_t c) {
  return {d.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)};
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Activations kept from the forward sweep of one direction.
struct DirectionCache {
  RowMatrix gates;  // T x 4H, post-nonlinearity
  RowMatrix c;      // T x H
  RowMatrix tanh_c; // T x H
  RowMatrix h;      // T x H
};

void run_forward(const Tensor& x, const Tensor& w, const Tensor& u, const Tensor& b,
                 std::size_t hidden, bool reverse, DirectionCache& cache) {
  const std::size_t steps = x.rows(), in = x.cols(), h4 = 4 * hidden;
  const auto H = static_cast<Eigen::Index>(hidden);
  RowMatrix z = view(x, steps, in) * view(w, in, h4);
  z.rowwise() += view(b, 1, h4).row(0);
  cache.gates.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(h4));
  cache.c.resize(static_cast<Eigen::Index>(steps), H);
  cache.tanh_c.resize(static_cast<Eigen::Index>(steps), H);
  cache.h.resize(static_cast<Eigen::Index>(steps), H);
  const auto U = view(u, hidden, h4);

  RowVector zt(h4);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto t = static_cast<Eigen::Index>(reverse ? steps - 1 - s : s);
    const Eigen::Index prev = reverse ? t + 1 : t - 1;
    zt = z.row(t);
    if (s > 0) zt.noalias() += cache.h.row(prev) * U;
    for (Eigen::Index k = 0; k < H; ++k) {
      const double i = sigmoid(zt[k]);
      const double f = sigmoid(zt[H + k]);
      const double g = std::tanh(zt[2 * H + k]);
      const double o = sigmoid(zt[3 * H + k]);
      const double c_prev = s > 0 ? cache.c(prev, k) : 0.0;
      const double c = f * c_prev + i * g;
      const double tc = std::tanh(c);
      cache.gates(t, k) = i;
      cache.gates(t, H + k) = f;
      cache.gates(t, 2 * H + k) = g;
      cache.gates(t, 3 * H + k) = o;
      cache.c(t, k) = c;
      cache.tanh_c(t, k) = tc;
      cache.h(t, k) = o * tc;
    }
  }
}

// dh: T x H adjoint of this direction's outputs. Accumulates into whichever
// of dx/dw/du/db are non-null.
void run_backward(const Tensor& x, const Tensor& w, const Tensor& u,
                  std::size_t hidden, bool reverse, const DirectionCache& cache,
                  const RowMatrix& dh, double* dx, double* dw, double* du,
                  double* db) {
  const std::size_t steps = x.rows(), in = x.cols(), h4 = 4 * hidden;
  const auto H = static_cast<Eigen::Index>(hidden);
  const auto U = view(u, hidden, h4);
  RowMatrix dz(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(h4));
  RowMatrix h_prev = RowMatrix::Zero(static_cast<Eigen::Index>(steps), H);
  RowVector dh_next = RowVector::Zero(H);
  RowVector dc_next = RowVector::Zero(H);

  for (std::size_t s = steps; s-- > 0;) {
    const auto t = static_cast<Eigen::Index>(reverse ? steps - 1 - s : s);
    const Eigen::Index prev = reverse ? t + 1 : t - 1;
    for (Eigen::Index k = 0; k < H; ++k) {
      const double i = cache.gates(t, k);
      const double f = cache.gates(t, H + k);
      const double g = cache.gates(t, 2 * H + k);
      const double o = cache.gates(t, 3 * H + k);
      const double tc = cache.tanh_c(t, k);
      const double c_prev = s > 0 ? cache.c(prev, k) : 0.0;
      const double dht = dh(t, k) + dh_next[k];
      const double d_o = dht * tc;
      const double dc = dht * o * (1.0 - tc * tc) + dc_next[k];
      dz(t, k) = dc * g * i * (1.0 - i);
      dz(t, H + k) = dc * c_prev * f * (1.0 - f);
      dz(t, 2 * H + k) = dc * i * (1.0 - g * g);
      dz(t, 3 * H + k) = d_o * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    dh_next.noalias() = dz.row(t) * U.transpose();
    if (s > 0) h_prev.row(t) = cache.h.row(prev);
  }

  if (du) view(std::span<double>(du, hidden * h4), hidden, h4).noalias() += h_prev.transpose() * dz;
  if (dw) view(std::span<double>(dw, in * h4), in, h4).noalias() += view(x, steps, in).transpose() * dz;
  if (db) view(std::span<double>(db, h4), 1, h4).noalias() += dz.colwise().sum();
  if (dx) view(std::span<double>(dx, steps * in), steps, in).noalias() += dz * view(w, in, h4).transpose();
}

std::size_t hidden_size(const LstmDirection& d) {
  const Tensor& u = d.u.value();
  if (u.rank() != 2 || u.cols() != 4 * u.rows())
    throw DimensionError("LSTM recurrent weight must be H x 4H, got " +
                         shape_to_string(u.shape()));
  return u.rows();
}

void check_direction(const LstmDirection& d, std::size_t in, std::size_t hidden) {
  const Tensor& w = d.w.value();
  if (w.rank() != 2 || w.rows() != in || w.cols() != 4 * hidden)
    throw DimensionError("LSTM input weight " + shape_to_string(w.shape()) +
                         " does not match input width " + std::to_string(in) +
                         " and hidden size " + std::to_string(hidden));
  if (hidden_size(d) != hidden)
    throw DimensionError("LSTM directions disagree on hidden size");
  if (d.bias.value().size() != 4 * hidden)
    throw DimensionError("LSTM bias must have 4H entries, got " +
                         shape_to_string(d.bias.shape()));
}

}  // namespace

Var bilstm_layer(Var x, const BiLstmLayer& layer) {
  const Tensor& xv = x.value();
  if (xv.rank() != 2) throw DimensionError("LSTM input must be T x in, got " + shape_to_string(xv.shape()));
  const std::size_t steps = xv.rows(), in = xv.cols();
  const std::size_t hidden = hidden_size(layer.forward);
  check_direction(layer.forward, in, hidden);
  check_direction(layer.backward, in, hidden);

  auto fw = std::make_shared<DirectionCache>();
  auto bw = std::make_shared<DirectionCache>();
  run_forward(xv, layer.forward.w.value(), layer.forward.u.value(),
              layer.forward.bias.value(), hidden, false, *fw);
  run_forward(xv, layer.backward.w.value(), layer.backward.u.value(),
              layer.backward.bias.value(), hidden, true, *bw);

  Tensor out({steps, 2 * hidden});
  auto o = view(out.data(), steps, 2 * hidden);
  const auto H = static_cast<Eigen::Index>(hidden);
  o.leftCols(H) = fw->h;
  o.rightCols(H) = bw->h;

  const std::size_t ix = x.id();
  const LstmDirection f = layer.forward, b = layer.backward;
  const Var inputs[] = {x, f.w, f.u, f.bias, b.w, b.u, b.bias};
  return x.tape()->record(
      std::move(out), std::span<const Var>(inputs),
      [ix, f, b, fw, bw, steps, hidden](Tape& t, std::span<const double> g) {
        const auto H = static_cast<Eigen::Index>(hidden);
        auto gm = Eigen::Map<const RowMatrix>(g.data(), static_cast<Eigen::Index>(steps), 2 * H);
        const Tensor& xv = t.value(ix);
        double* dx = t.requires_grad(ix) ? t.adjoint(ix).data() : nullptr;
        auto grad_of = [&t](Var v) { return v.requires_grad() ? t.adjoint(v.id()).data() : nullptr; };
        const RowMatrix dh_f = gm.leftCols(H);
        const RowMatrix dh_b = gm.rightCols(H);
        run_backward(xv, f.w.value(), f.u.value(), hidden, false, *fw, dh_f, dx,
                     grad_of(f.w), grad_of(f.u), grad_of(f.bias));
        run_backward(xv, b.w.value(), b.u.value(), hidden, true, *bw, dh_b, dx,
                     grad_of(b.w), grad_of(b.u), grad_of(b.bias));
      });
}

Var bilstm_stack_forward(Var x, std::span<const BiLstmLayer> layers) {
  if (x.value().empty()) throw DataError("bilstm_stack_forward: empty input sequence");
  if (x.value().rank() != 2)
    throw DimensionError("bilstm_stack_forward: input must be T x in, got " +
                         shape_to_string(x.value().shape()));
  if (!layers.empty() && layers.front().forward.w.value().rows() != x.value().cols())
    throw DimensionError("bilstm_stack_forward: input width " +
                         std::to_string(x.value().cols()) + " does not match first layer " +
                         shape_to_string(layers.front().forward.w.shape()));
  Var h = x;
  for (const BiLstmLayer& layer : layers) h = bilstm_layer(h, layer);
  return h;
}

}  // namespace mtl
