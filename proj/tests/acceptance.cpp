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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Criterion numbers given on the command
// line restrict the run to those criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "demandnet/data/synth.hpp"
#include "demandnet/eval/baselines.hpp"
#include "demandnet/eval/experiment.hpp"
#include "demandnet/features/spearman.hpp"
#include "demandnet/nn/dense.hpp"
#include "demandnet/nn/recurrent.hpp"
#include "demandnet/nn/training.hpp"
#include "demandnet/predict/forecaster.hpp"

namespace dn = demandnet;
using dn::Matrix;
using dn::Rng;
using dn::Vector;

namespace {

const std::vector<uint64_t> kSeeds = {1, 2, 3, 4, 5};
const std::vector<int> kHorizons = {10, 20, 40, 80};

struct Outcome {
  bool pass = false;
  std::string detail;
};

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-scale, scale);
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Desk-scale pipeline used by the data-driven criteria.
dn::eval::PipelineConfig desk_config() {
  dn::eval::PipelineConfig c;
  c.window = 32;
  c.autoencoder_arch.encoder_widths = {24, 16};
  c.autoencoder_arch.bottleneck = 8;
  c.autoencoder.max_windows = 800;
  c.autoencoder.train.optimizer = dn::nn::OptimizerKind::kAdam;
  c.autoencoder.train.learning_rate = 3e-3;
  c.autoencoder.train.batch_size = 32;
  c.autoencoder.train.epochs = 12;
  c.effect.train.epochs = 30;
  c.effect.train.batch_size = 64;
  c.forecaster_arch.hidden = 32;
  c.forecaster_arch.layers = 2;
  c.forecaster.train.learning_rate = 3e-3;
  c.forecaster.train.batch_size = 32;
  c.forecaster.train.epochs = 12;
  c.forecaster.train.samples_per_epoch = 1024;
  c.forecaster.train.patience = 4;
  c.kappa = 100;
  c.dropout_windows = 4;
  c.origin_stride = 5;
  return c;
}

std::vector<dn::data::SeriesBundle> default_synthetic(uint64_t seed) {
  return dn::data::synth_generate(dn::data::SynthConfig{}, seed);
}

// 1. Spearman against an O(n^2) rank-then-Pearson oracle.
double oracle_spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ranks = [](const std::vector<double>& x) {
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double less = 0.0, equal = 0.0;
      for (const double y : x) {
        less += y < x[i];
        equal += y == x[i];
      }
      r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
  };
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome criterion1() {
  Rng rng(0x5ea);
  double worst = 0.0;
  int invariance_breaks = 0, undefined = 0, compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + rng.index(48);
    const bool ties = rng.uniform() < 0.3;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = ties ? std::floor(rng.uniform(0.0, 5.0)) : rng.normal();
      b[i] = ties ? std::floor(rng.uniform(0.0, 5.0)) : rng.normal() + 0.5 * a[i];
    }
    double got = 0.0;
    try {
      got = dn::features::spearman(a, b);
    } catch (const dn::UndefinedCorrelation&) {
      ++undefined;
      continue;
    }
    ++compared;
    worst = std::max(worst, std::abs(got - oracle_spearman(a, b)));
    std::vector<double> fa(n);
    for (std::size_t i = 0; i < n; ++i) fa[i] = std::exp(0.5 * a[i]) + a[i];
    if (dn::features::spearman(fa, b) != got) ++invariance_breaks;
  }
  return {worst <= 1e-12 && invariance_breaks == 0 && compared > 900,
          "max |diff| " + fmt(worst) + " over " + std::to_string(compared) +
              " pairs (" + std::to_string(undefined) + " constant, skipped), invariance breaks " +
              std::to_string(invariance_breaks)};
}

// 2. Central finite-difference gradient checks.
Outcome criterion2() {
  constexpr double eps = 1e-5;
  std::vector<std::pair<std::string, double>> errors;
  Rng rng(0x62ad);
  {
    dn::nn::DenseLayer layer(4, 3, dn::nn::Activation::kSigmoid, rng, "d");
    const Matrix x = random_matrix(4, 5, rng);
    const Matrix r = random_matrix(3, 5, rng);
    dn::nn::ParamList ps;
    layer.collect(ps);
    errors.emplace_back("dense", dn::nn::grad_check(
        ps, [&] { return layer.forward(x).cwiseProduct(r).sum(); },
        [&] {
          dn::nn::zero_grads(ps);
          layer.backward(x, layer.forward(x), r);
        },
        eps, 100, 1).max_relative_error);
  }
  for (const auto kind : {dn::nn::CellKind::kLstm, dn::nn::CellKind::kGru}) {
    dn::nn::RecurrentCell cell(kind, 3, 5, rng, "c");
    dn::nn::Sequence xs, rs;
    for (int t = 0; t < 8; ++t) {
      xs.push_back(random_matrix(3, 2, rng));
      rs.push_back(random_matrix(5, 2, rng));
    }
    const auto init = cell.zero_state(2);
    const auto loss = [&] {
      const auto hs = cell.forward(xs, init);
      double s = 0.0;
      for (std::size_t t = 0; t < hs.size(); ++t) s += hs[t].cwiseProduct(rs[t]).sum();
      return s;
    };
    dn::nn::ParamList ps;
    cell.collect(ps);
    errors.emplace_back(dn::nn::cell_name(kind), dn::nn::grad_check(
        ps, loss,
        [&] {
          dn::nn::zero_grads(ps);
          dn::nn::RecurrentCell::Trace trace;
          cell.forward(xs, init, &trace);
          cell.backward(trace, rs);
        },
        eps, 60, 2).max_relative_error);
  }
  {
    dn::features::AutoencoderArch arch;
    arch.encoder_widths = {4, 3};
    arch.bottleneck = 2;
    arch.channels = 2;
    arch.length = 5;
    dn::features::StackedAutoencoder sae(arch, 3);
    std::vector<Matrix> windows;
    for (int i = 0; i < 3; ++i) windows.push_back(random_matrix(5, 2, rng));
    std::vector<const Matrix*> ptrs;
    for (const auto& w : windows) ptrs.push_back(&w);
    const auto ps = sae.params();
    errors.emplace_back("autoencoder", dn::nn::grad_check(
        ps, [&] { return sae.loss(ptrs, 0.01); },
        [&] {
          dn::nn::zero_grads(ps);
          sae.loss_and_grad(ptrs, 0.01);
        },
        eps, 20, 3).max_relative_error);
  }
  {
    dn::effects::EffectModel model({"a", "b", "policy"},
                                   dn::effects::EffectArch{{5, 4}, dn::nn::Activation::kSigmoid},
                                   4);
    const Matrix x = random_matrix(9, 3, rng, 2.0);
    const Vector y = random_matrix(9, 1, rng).col(0);
    model.set_feature_stats(x);
    const auto ps = model.params();
    errors.emplace_back("effect", dn::nn::grad_check(
        ps, [&] { return model.loss(x, y, 0.05); },
        [&] {
          dn::nn::zero_grads(ps);
          model.loss_and_grad(x, y, 0.05);
        },
        eps, 40, 4).max_relative_error);
  }
  {
    dn::predict::ForecasterArch arch;
    arch.hidden = 5;
    arch.window = 6;
    arch.horizon = 4;
    arch.channels = 3;
    dn::predict::ForecasterModel m(arch, 2, 5);
    dn::effects::EffectModel e({"policy"}, dn::effects::EffectArch{{4}, dn::nn::Activation::kSigmoid}, 6);
    Matrix range(2, 1);
    range << 0.0, 1.0;
    e.set_feature_stats(range);
    e.policy_feature = "policy";
    m.effect = e;
    std::vector<Matrix> windows;
    for (int b = 0; b < 3; ++b) windows.push_back(random_matrix(6, 3, rng));
    dn::predict::ForecasterModel::Batch batch;
    for (const auto& w : windows) batch.windows.push_back(&w);
    batch.policies = random_matrix(4, 3, rng).cwiseAbs();
    batch.extras = random_matrix(2, 3, rng);
    const Matrix labels = random_matrix(4, 3, rng);
    std::vector<Matrix> masks;
    for (int l = 0; l < 2; ++l) {
      Matrix mask(5, 3);
      for (Eigen::Index i = 0; i < mask.size(); ++i) mask(i) = rng.uniform() < 0.2 ? 0.0 : 1.25;
      masks.push_back(mask);
    }
    const auto ps = m.params();
    errors.emplace_back("forecaster", dn::nn::grad_check(
        ps, [&] { return m.loss(batch, labels, masks, 0.01); },
        [&] {
          dn::nn::zero_grads(ps);
          m.loss_and_grad(batch, labels, masks, 0.01);
        },
        eps, 60, 7).max_relative_error);
  }
  bool pass = true;
  std::string detail;
  for (const auto& [name, err] : errors) {
    pass = pass && err <= 1e-4;
    detail += (detail.empty() ? "" : ", ") + name + " " + fmt(err);
  }
  return {pass, "max relative error: " + detail};
}

// 3. MC dropout invariants on random fixtures.
Outcome criterion3() {
  dn::predict::ForecasterArch arch;
  arch.hidden = 8;
  arch.window = 10;
  arch.horizon = 6;
  arch.channels = 2;
  arch.demand_cell = dn::predict::DemandCellMode::kNone;
  dn::predict::ForecasterModel m(arch, 0, 11);
  Rng rng(0x3c);
  bool zero_ok = true;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    dn::predict::ForecastInput in;
    in.window = random_matrix(10, 2, rng);
    in.policies = Vector::Zero(6);
    in.extras = Vector(0);
    const auto d0 = dn::predict::mc_forecast(m, in, 30, 0.0, trial);
    const auto d1 = dn::predict::mc_forecast(m, in, 1, 0.4, trial);
    zero_ok = zero_ok && (d0.sd.array() == 0.0).all() && (d1.sd.array() == 0.0).all();
    const auto d = dn::predict::mc_forecast(m, in, 40, 0.3, trial);
    const Vector truth = random_matrix(6, 1, rng).col(0);
    const Vector v = dn::predict::variance_vs_truth(d, truth);
    const Vector expect = d.sd.array().square() + (d.mean - truth).array().square();
    worst = std::max(worst, (v - expect).cwiseAbs().maxCoeff());
  }
  const int kappa = dn::eval::PipelineConfig{}.kappa;
  return {zero_ok && worst <= 1e-12 && kappa == 100,
          std::string("sd==0 for p=0 and K=1: ") + (zero_ok ? "yes" : "no") +
              ", decomposition max |diff| " + fmt(worst) + ", default K " +
              std::to_string(kappa)};
}

// 4. Autoencoder reconstruction and training-loss trend.
Outcome criterion4() {
  std::vector<double> ratios;
  int slopes_ok = 0;
  std::string detail;
  auto config = desk_config();
  config.autoencoder_arch.cell = dn::nn::CellKind::kGru;
  config.autoencoder_arch.encoder_widths = {32, 24};
  config.autoencoder_arch.bottleneck = 16;
  config.autoencoder.max_windows = 1200;
  config.autoencoder.train.batch_size = 16;
  config.autoencoder.train.epochs = 40;
  config.autoencoder.threshold_fraction = std::numeric_limits<double>::infinity();
  for (const uint64_t seed : kSeeds) {
    const auto series = dn::eval::training_series(default_synthetic(seed), config.fractions);
    const auto r = dn::eval::fit_autoencoder_stage(series, config, seed);
    const double ratio = r.validation_mse.back() / r.input_variance;
    ratios.push_back(ratio);
    const double slope = (r.train_loss.back() - r.train_loss.front()) /
                         static_cast<double>(std::max<std::size_t>(1, r.train_loss.size() - 1));
    slopes_ok += slope <= 1e-6;
    detail += " " + fmt(ratio);
  }
  const double med = median(ratios);
  return {med <= 0.2 && slopes_ok == static_cast<int>(kSeeds.size()),
          "median held-out MSE / variance " + fmt(med) + " (per seed" + detail +
              "), loss trend non-increasing in " + std::to_string(slopes_ok) + "/5"};
}

// Shared split80 + unseen runs for criteria 5-7.
struct SeedExperiment {
  dn::eval::ExperimentReport split;
  dn::eval::ExperimentReport unseen;
};

std::vector<SeedExperiment>& experiments() {
  static std::vector<SeedExperiment> runs;
  if (!runs.empty()) return runs;
  const auto config = desk_config();
  for (const uint64_t seed : kSeeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto bundles = default_synthetic(seed);
    SeedExperiment e;
    e.split = dn::eval::run_split80(
        bundles, {"demandnet-lstm", "demandnet-gru", "demandnet-lstm-noskip", "exp-smoothing", "ar"},
        kHorizons, {seed}, config);
    e.unseen = dn::eval::run_unseen(bundles, dn::eval::random_holdout(bundles, 4, seed),
                                    {"demandnet-lstm"}, kHorizons, {seed}, config);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "seed " << seed << " experiments: " << fmt(secs) << " s\n"
              << dn::eval::report_table(e.split) << dn::eval::report_table(e.unseen);
    runs.push_back(std::move(e));
  }
  return runs;
}

double cell_mae(const dn::eval::ExperimentReport& r, const std::string& method, int h) {
  const auto& c = r.cell(method, h);
  return c.failed ? std::numeric_limits<double>::infinity() : c.mae;
}

// 5. DemandCell ablation at H = 40.
Outcome criterion5() {
  int wins = 0;
  std::string detail;
  for (const auto& e : experiments()) {
    const double with = cell_mae(e.split, "demandnet-lstm", 40);
    const double without = cell_mae(e.split, "demandnet-lstm-noskip", 40);
    wins += with <= 0.8 * without;
    detail += " " + fmt(with / without);
  }
  return {wins >= 4, std::to_string(wins) + "/5 seeds with MAE ratio <= 0.8 (ratios" + detail + ")"};
}

// 6. DemandNet against tuned exponential smoothing and AR at long horizons.
Outcome criterion6() {
  int wins_lstm = 0, wins_gru = 0;
  std::string detail;
  for (const auto& e : experiments()) {
    bool lstm = true, gru = true;
    for (const int h : {40, 80}) {
      const double best_baseline =
          std::min(cell_mae(e.split, "exp-smoothing", h), cell_mae(e.split, "ar", h));
      lstm = lstm && cell_mae(e.split, "demandnet-lstm", h) < best_baseline;
      gru = gru && cell_mae(e.split, "demandnet-gru", h) < best_baseline;
      detail += " H" + std::to_string(h) + ":" + fmt(cell_mae(e.split, "demandnet-lstm", h)) +
                "/" + fmt(cell_mae(e.split, "demandnet-gru", h)) + "/" +
                fmt(cell_mae(e.split, "exp-smoothing", h)) + "/" +
                fmt(cell_mae(e.split, "ar", h));
    }
    wins_lstm += lstm;
    wins_gru += gru;
  }
  return {wins_lstm >= 4 && wins_gru >= 4,
          "seeds beating both baselines at H 40 and 80: lstm " + std::to_string(wins_lstm) +
              "/5, gru " + std::to_string(wins_gru) + "/5 (lstm/gru/es/ar MAE" + detail + ")"};
}

// Mean raw-unit MAE of `method` at horizon h over the given series of seed run 0.
double series_raw_mae(const dn::eval::ExperimentReport& r, const std::vector<std::string>& ids,
                      const std::string& method, int h) {
  double sum = 0.0;
  for (const auto& id : ids) {
    const auto& cells = r.runs.at(0).series_raw_cells.at(id);
    const auto it = std::find_if(cells.begin(), cells.end(), [&](const dn::eval::MetricSet& m) {
      return m.method == method && m.horizon == h;
    });
    if (it == cells.end()) return std::numeric_limits<double>::infinity();
    sum += it->mae;
  }
  return sum / static_cast<double>(ids.size());
}

// 7. Unseen error exceeds split80 error on the same held-out series, in
// original units (the two protocols normalize with different statistics);
// evaluation leaves parameters intact.
Outcome criterion7() {
  int wins = 0, intact = 0;
  std::string detail;
  for (const auto& e : experiments()) {
    bool higher = true;
    for (const int h : kHorizons) {
      const double unseen = e.unseen.runs.at(0).raw_cells.empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : series_raw_mae(e.unseen, e.unseen.series, "demandnet-lstm", h);
      higher = higher && unseen > series_raw_mae(e.split, e.unseen.series, "demandnet-lstm", h);
    }
    bool same = true;
    for (const auto& run : e.unseen.runs) same = same && run.parameters_unchanged;
    wins += higher && same;
    intact += same;
    detail += " " + fmt(series_raw_mae(e.unseen, e.unseen.series, "demandnet-lstm", 80) /
                        series_raw_mae(e.split, e.unseen.series, "demandnet-lstm", 80));
  }
  return {wins >= 4, std::to_string(wins) + "/5 seeds higher at every horizon, parameters intact in " +
                         std::to_string(intact) + "/5 (H80 unseen/split raw MAE ratios on held series" +
                         detail + ")"};
}

// 8. Metric hand oracles.
Outcome criterion8() {
  using V = std::vector<double>;
  double worst = 0.0;
  const auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  const V truth = {1.0, 2.0};
  check(dn::eval::mae(truth, truth), 0.0);
  check(dn::eval::rmse(truth, truth), 0.0);
  check(dn::eval::mae(V{2.0, 1.0}, truth), 1.0);
  check(dn::eval::rmse(V{2.0, 1.0}, truth), 1.0);
  check(dn::eval::mae(V{4.0, 6.0}, truth), 3.5);
  check(dn::eval::rmse(V{4.0, 6.0}, truth), std::sqrt(12.5));
  check(dn::eval::pred_sd(V{2.0, 2.0, 2.0}), 0.0);
  check(dn::eval::pred_sd(V{0.0, 2.0}), 1.0);
  check(dn::eval::pred_sd(V{1.0, 2.0, 3.0, 4.0}), std::sqrt(1.25));
  Rng rng(0x8);
  for (int trial = 0; trial < 100; ++trial) {
    V p, t;
    const double e = rng.uniform(0.1, 3.0);
    for (int i = 0; i < 20; ++i) {
      t.push_back(rng.normal());
      p.push_back(t.back() + (rng.uniform() < 0.5 ? e : -e));
    }
    check(dn::eval::mae(p, t), dn::eval::rmse(p, t));
  }
  return {worst <= 1e-12, "max |diff| " + fmt(worst)};
}

// 9. Determinism of reports and forecasts, checkpoint persistence.
Outcome criterion9() {
  auto config = desk_config();
  config.use_autoencoder = true;
  config.autoencoder.train.epochs = 2;
  config.effect.train.epochs = 5;
  config.forecaster.train.epochs = 2;
  config.forecaster.train.samples_per_epoch = 256;
  config.kappa = 20;
  config.dropout_windows = 2;
  config.origin_stride = 20;
  dn::data::SynthConfig synth;
  synth.series_count = 4;
  synth.length = 400;
  synth.shock_onset = 240;
  const auto bundles = dn::data::synth_generate(synth, 9);
  const std::vector<std::string> methods = {"demandnet-lstm", "exp-smoothing"};
  const std::vector<int> horizons = {10, 20};
  const auto a = dn::eval::run_split80(bundles, methods, horizons, {9}, config);
  const auto b = dn::eval::run_split80(bundles, methods, horizons, {9}, config);
  const bool reports = dn::eval::report_csv(a) == dn::eval::report_csv(b) &&
                       dn::eval::report_csv(a, true) == dn::eval::report_csv(b, true);

  const auto series = dn::eval::training_series(bundles, config.fractions);
  auto method = dn::eval::method_config(config, "demandnet-lstm");
  method.forecaster_arch.horizon = 20;
  const auto shared = dn::eval::fit_shared_stages(series, method, 9);
  const auto model = dn::eval::fit_forecaster(series, shared, method, 9).model;
  const auto again = dn::eval::fit_forecaster(series, shared, method, 9).model;
  const auto loaded = dn::predict::ForecasterModel::load(model.save());
  const auto& s = series.front();
  const auto norm = dn::data::normalize(s.bundle, dn::data::fit_norm_stats(s.bundle, s.split.train));
  const auto input = model.make_input(norm, s.split.test.begin);
  const auto f0 = dn::predict::mc_forecast(model, input, 50, 0.2, 3);
  const auto f1 = dn::predict::mc_forecast(loaded, loaded.make_input(norm, s.split.test.begin), 50, 0.2, 3);
  const auto f2 = dn::predict::mc_forecast(again, again.make_input(norm, s.split.test.begin), 50, 0.2, 3);
  const std::string rows0 = dn::predict::forecast_csv_rows(s.bundle.id, f0, nullptr);
  const bool persisted = f0.samples == f1.samples && loaded.save() == model.save() &&
                         rows0 == dn::predict::forecast_csv_rows(s.bundle.id, f1, nullptr);
  const bool retrained = again.save() == model.save() && f2.samples == f0.samples;
  return {reports && persisted && retrained,
          std::string("reports byte-identical: ") + (reports ? "yes" : "no") +
              ", retrained forecast identical: " + (retrained ? "yes" : "no") +
              ", checkpoint round trip bit-identical: " + (persisted ? "yes" : "no")};
}

// 10. Policy marginal curve shape.
Outcome criterion10() {
  const auto config = desk_config();
  std::vector<double> fractions;
  std::string detail;
  for (const uint64_t seed : kSeeds) {
    const auto series = dn::eval::training_series(default_synthetic(seed), config.fractions);
    const auto stages = dn::eval::fit_effect_stage(series, {}, config, seed);
    const auto curve = dn::effects::marginal_effect(stages.model, "policy",
                                                    dn::effects::linear_grid(0.0, 1.0, 101));
    int violations = 0;
    for (std::size_t i = 1; i < curve.values.size(); ++i) {
      violations += curve.values[i] > curve.values[i - 1];
    }
    const double frac = violations / static_cast<double>(curve.values.size() - 1);
    fractions.push_back(frac);
    detail += " " + fmt(frac) + "(drop " + fmt(curve.values.front() - curve.values.back()) + ")";
  }
  const double med = median(fractions);
  return {med <= 0.01, "median violation fraction " + fmt(med) + " (per seed" + detail + ")"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << "  [" << fmt(secs) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
