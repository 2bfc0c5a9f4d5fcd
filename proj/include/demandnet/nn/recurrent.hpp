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

// LSTM and GRU cells with hand-derived backpropagation through time.
//
// LSTM (gate rows ordered i, f, g, o):
//   a = W x + U h + b
//   i = sig(a_i)  f = sig(a_f)  g = tanh(a_g)  o = sig(a_o)
//   c' = f * c + i * g          h' = o * tanh(c')
//
// GRU (gate rows ordered r, z, n):
//   r = sig(W_r x + U_r h + b_r)      z = sig(W_z x + U_z h + b_z)
//   n = tanh(W_n x + U_n (r * h) + b_n)
//   h' = (1 - z) * h + z * n
//
// All tensors are column batches: inputs are (input_size x batch), states
// (hidden_size x batch).

#pragma once

#include <string>
#include <vector>

#include "demandnet/common.hpp"
#include "demandnet/nn/param.hpp"

namespace demandnet::nn {

enum class CellKind { kLstm, kGru };

std::string cell_name(CellKind kind);
CellKind cell_from_name(const std::string& name);

using Sequence = std::vector<Matrix>;

// LSTM carries (h, c); for a GRU `c` is an empty matrix.
struct CellState {
  Matrix h;
  Matrix c;
};

class RecurrentCell {
 public:
  struct StepCache {
    Matrix x;
    Matrix h_prev;
    Matrix c_prev;
    Matrix gates;   // post-activation gate values, stacked as in the layout
    Matrix c;       // LSTM: new cell state
    Matrix tanh_c;  // LSTM: tanh(c)
    Matrix rh;      // GRU: r * h_prev
  };
  using Trace = std::vector<StepCache>;

  RecurrentCell() = default;
  RecurrentCell(CellKind kind, int input_size, int hidden_size, Rng& rng,
                const std::string& name);

  CellKind kind() const { return kind_; }
  int input_size() const { return static_cast<int>(w_.value.cols()); }
  int hidden_size() const { return hidden_; }
  int gate_count() const { return kind_ == CellKind::kLstm ? 4 : 3; }

  CellState zero_state(Eigen::Index batch) const;

  CellState step(const Matrix& x, const CellState& state,
                 StepCache* cache = nullptr) const;

  // Given gradients wrt the new (h, c), accumulates parameter gradients and
  // returns the gradient wrt x; writes gradients wrt the previous state.
  Matrix step_backward(const StepCache& cache, const Matrix& dh,
                       const Matrix& dc, CellState* d_prev);

  // Runs the cell over a sequence and returns the hidden output per step.
  Sequence forward(const Sequence& xs, const CellState& init,
                   Trace* trace = nullptr) const;

  // dhs[t] is the loss gradient wrt output t. Returns gradients wrt each
  // input; writes the gradient wrt the initial state when d_init != nullptr.
  Sequence backward(const Trace& trace, const Sequence& dhs,
                    CellState* d_init = nullptr);

  Param& w() { return w_; }
  Param& u() { return u_; }
  Param& b() { return b_; }
  const Param& w() const { return w_; }
  const Param& u() const { return u_; }
  const Param& b() const { return b_; }

  void collect(ParamList& out) {
    out.push_back(&w_);
    out.push_back(&u_);
    out.push_back(&b_);
  }

 private:
  CellKind kind_ = CellKind::kLstm;
  int hidden_ = 0;
  Param w_;
  Param u_;
  Param b_;
};

// Unbatched convenience wrapper around RecurrentCell::step.
std::pair<Vector, CellState> cell_step(const RecurrentCell& cell,
                                       const Vector& input,
                                       const CellState& state);

}  // namespace demandnet::nn
