/*
 * Copyright 2026 The DemandNet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "demandnet/nn/recurrent.hpp"

#include "demandnet/nn/dense.hpp"

namespace demandnet::nn {
namespace {

Matrix sigmoid_of(const Matrix& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

std::string cell_name(CellKind kind) {
  return kind == CellKind::kLstm ? "lstm" : "gru";
}

CellKind cell_from_name(const std::string& name) {
  if (name == "lstm" || name == "LSTM") return CellKind::kLstm;
  if (name == "gru" || name == "GRU") return CellKind::kGru;
  throw InvalidArgument("unknown cell kind '" + name + "' (expected lstm or gru)");
}

RecurrentCell::RecurrentCell(CellKind kind, int input_size, int hidden_size,
                             Rng& rng, const std::string& name)
    : kind_(kind), hidden_(hidden_size) {
  const int gates = gate_count();
  w_ = Param(name + ".w", gates * hidden_size, input_size, true);
  u_ = Param(name + ".u", gates * hidden_size, hidden_size, true);
  b_ = Param(name + ".b", gates * hidden_size, 1, false);
  if (input_size > 0) init_uniform(w_.value, input_size, hidden_size, rng);
  init_uniform(u_.value, hidden_size, hidden_size, rng);
  if (kind == CellKind::kLstm) {
    // Forget gate starts open.
    b_.value.block(hidden_size, 0, hidden_size, 1).setOnes();
  }
}

CellState RecurrentCell::zero_state(Eigen::Index batch) const {
  CellState s;
  s.h = Matrix::Zero(hidden_, batch);
  if (kind_ == CellKind::kLstm) s.c = Matrix::Zero(hidden_, batch);
  return s;
}

CellState RecurrentCell::step(const Matrix& x, const CellState& state,
                              StepCache* cache) const {
  if (x.rows() != w_.value.cols()) {
    throw DimensionMismatch("cell '" + w_.name + "' expects input size " +
                            std::to_string(w_.value.cols()) + ", got " +
                            std::to_string(x.rows()));
  }
  if (state.h.rows() != hidden_ || state.h.cols() != x.cols()) {
    throw DimensionMismatch("cell '" + w_.name + "' state shape mismatch");
  }
  const Eigen::Index H = hidden_;
  CellState next;
  if (kind_ == CellKind::kLstm) {
    if (state.c.rows() != H || state.c.cols() != x.cols()) {
      throw DimensionMismatch("cell '" + w_.name + "' LSTM cell-state shape");
    }
    Matrix a = w_.value * x;
    a.noalias() += u_.value * state.h;
    a.colwise() += b_.value.col(0);
    Matrix gates(4 * H, x.cols());
    gates.topRows(2 * H) = sigmoid_of(a.topRows(2 * H));
    gates.middleRows(2 * H, H) = a.middleRows(2 * H, H).array().tanh().matrix();
    gates.bottomRows(H) = sigmoid_of(a.bottomRows(H));
    next.c = (gates.middleRows(H, H).array() * state.c.array() +
              gates.topRows(H).array() * gates.middleRows(2 * H, H).array())
                 .matrix();
    Matrix tanh_c = next.c.array().tanh().matrix();
    next.h = (gates.bottomRows(H).array() * tanh_c.array()).matrix();
    if (cache) {
      cache->x = x;
      cache->h_prev = state.h;
      cache->c_prev = state.c;
      cache->gates = std::move(gates);
      cache->c = next.c;
      cache->tanh_c = std::move(tanh_c);
    }
  } else {
    Matrix ax = w_.value * x;
    ax.colwise() += b_.value.col(0);
    Matrix gates(3 * H, x.cols());
    Matrix rz = ax.topRows(2 * H);
    rz.noalias() += u_.value.topRows(2 * H) * state.h;
    gates.topRows(2 * H) = sigmoid_of(rz);
    Matrix rh = (gates.topRows(H).array() * state.h.array()).matrix();
    Matrix an = ax.bottomRows(H);
    an.noalias() += u_.value.bottomRows(H) * rh;
    gates.bottomRows(H) = an.array().tanh().matrix();
    const auto z = gates.middleRows(H, H).array();
    next.h = ((1.0 - z) * state.h.array() + z * gates.bottomRows(H).array())
                 .matrix();
    if (cache) {
      cache->x = x;
      cache->h_prev = state.h;
      cache->gates = std::move(gates);
      cache->rh = std::move(rh);
    }
  }
  return next;
}

Matrix RecurrentCell::step_backward(const StepCache& cache, const Matrix& dh,
                                    const Matrix& dc, CellState* d_prev) {
  const Eigen::Index H = hidden_;
  const Eigen::Index batch = dh.cols();
  Matrix da(gate_count() * H, batch);
  CellState prev;
  if (kind_ == CellKind::kLstm) {
    const auto i = cache.gates.topRows(H).array();
    const auto f = cache.gates.middleRows(H, H).array();
    const auto g = cache.gates.middleRows(2 * H, H).array();
    const auto o = cache.gates.bottomRows(H).array();
    const auto tc = cache.tanh_c.array();
    Matrix dc_total = (dh.array() * o * (1.0 - tc.square())).matrix();
    if (dc.size() != 0) dc_total += dc;
    const auto dct = dc_total.array();
    da.topRows(H) = (dct * g * i * (1.0 - i)).matrix();
    da.middleRows(H, H) = (dct * cache.c_prev.array() * f * (1.0 - f)).matrix();
    da.middleRows(2 * H, H) = (dct * i * (1.0 - g.square())).matrix();
    da.bottomRows(H) = (dh.array() * tc * o * (1.0 - o)).matrix();
    prev.c = (dct * f).matrix();
    u_.grad.noalias() += da * cache.h_prev.transpose();
    prev.h = u_.value.transpose() * da;
  } else {
    const auto r = cache.gates.topRows(H).array();
    const auto z = cache.gates.middleRows(H, H).array();
    const auto n = cache.gates.bottomRows(H).array();
    const auto hp = cache.h_prev.array();
    const auto dha = dh.array();
    da.bottomRows(H) = (dha * z * (1.0 - n.square())).matrix();
    const Matrix drh = u_.value.bottomRows(H).transpose() * da.bottomRows(H);
    da.topRows(H) = (drh.array() * hp * r * (1.0 - r)).matrix();
    da.middleRows(H, H) = (dha * (n - hp) * z * (1.0 - z)).matrix();
    u_.grad.topRows(2 * H).noalias() += da.topRows(2 * H) * cache.h_prev.transpose();
    u_.grad.bottomRows(H).noalias() += da.bottomRows(H) * cache.rh.transpose();
    prev.h = (dha * (1.0 - z) + drh.array() * r).matrix();
    prev.h.noalias() += u_.value.topRows(2 * H).transpose() * da.topRows(2 * H);
  }
  w_.grad.noalias() += da * cache.x.transpose();
  b_.grad.col(0) += da.rowwise().sum();
  if (d_prev) *d_prev = std::move(prev);
  return w_.value.transpose() * da;
}

Sequence RecurrentCell::forward(const Sequence& xs, const CellState& init,
                                Trace* trace) const {
  Sequence hs;
  hs.reserve(xs.size());
  if (trace) {
    trace->clear();
    trace->resize(xs.size());
  }
  CellState state = init;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    state = step(xs[t], state, trace ? &(*trace)[t] : nullptr);
    hs.push_back(state.h);
  }
  return hs;
}

Sequence RecurrentCell::backward(const Trace& trace, const Sequence& dhs,
                                 CellState* d_init) {
  if (dhs.size() != trace.size()) {
    throw DimensionMismatch("backward: gradient sequence length mismatch");
  }
  Sequence dxs(trace.size());
  CellState carry;
  for (std::size_t k = trace.size(); k-- > 0;) {
    Matrix dh;
    if (dhs[k].size() != 0) {
      dh = dhs[k];
      if (carry.h.size() != 0) dh += carry.h;
    } else if (carry.h.size() != 0) {
      dh = carry.h;
    } else {
      dh = Matrix::Zero(hidden_, trace[k].x.cols());
    }
    CellState prev;
    dxs[k] = step_backward(trace[k], dh, carry.c, &prev);
    carry = std::move(prev);
  }
  if (d_init) *d_init = std::move(carry);
  return dxs;
}

std::pair<Vector, CellState> cell_step(const RecurrentCell& cell,
                                       const Vector& input,
                                       const CellState& state) {
  CellState next = cell.step(Matrix(input), state);
  Vector out = next.h.col(0);
  return {std::move(out), std::move(next)};
}

}  // namespace demandnet::nn
