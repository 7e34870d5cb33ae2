// Copyright 2026 The chainclock Authors
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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "chainclock/chain_model.hpp"
#include "chainclock/clock_metrics.hpp"
#include "chainclock/propagation.hpp"

namespace chainclock {

// Sudden quench: the chain evolves under its own effective matrix until
// t_dc, then under the matrix with J_1 = 0 (site 1 detached). Population left
// on site 1 at t_dc never reaches the sink.

struct QuenchOptions {
  // Tick window of the baseline clock; every quenched evaluation uses the
  // same horizon so that 𝒩^eff and the baseline are directly comparable.
  StatisticsWindow window;
  double absorbed_floor = 1e-3;
  double plateau_fraction = 0.99;
  double panel = 0.05;
  std::size_t threads = 1;
};

// S(t) on `grid` (starting at 0, strictly increasing). Throws InvalidInput if
// t_dc < 0 or t_dc lies beyond the last grid point.
TimeSeries piecewise_survival(const ChainSpec& spec, double t_dc, std::span<const double> grid);

// Precision of the tick time conditioned on a tick within the series span,
// by trapezoidal quadrature of S:
//   mu = (int S - T S(T)) / P,  t2 = (2 int t S - T^2 S(T)) / P,  P = 1 - S(T).
// Throws NoTick when P <= absorbed_floor.
double effective_precision(const TimeSeries& survival, double absorbed_floor = 1e-3);

struct QuenchPoint {
  double t_dc = 0.0;
  std::optional<double> n_eff;  // empty: nothing absorbed ("no tick")
  double mu = 0.0;
  double absorbed = 0.0;
  double trapped = 0.0;  // |psi_1(t_dc)|^2, the population that never ticks
};

// Conditional statistics on [0, horizon] by Gauss-Legendre quadrature of the
// piecewise-propagated survival. Throws NoTick below the absorbed floor.
TickStatistics quench_statistics(const ChainSpec& spec, double t_dc, double horizon,
                                 const QuenchOptions& options = {});

struct QuenchSweep {
  std::size_t n_sites = 0;
  std::vector<double> tdc_grid;
  std::vector<std::optional<double>> n_eff;
  std::vector<QuenchPoint> points;
  double baseline = 0.0;     // precision of the unquenched clock
  double baseline_mu = 0.0;  // its mean tick time
  double horizon = 0.0;
  // Smallest grid t_dc with n_eff >= plateau_fraction * baseline.
  std::optional<double> plateau_onset;

  double onset_ratio() const;  // plateau_onset / baseline_mu; NaN without onset
};

// n points log-spaced in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);
// 60 log-spaced points in [1e-2, mu].
std::vector<double> default_tdc_grid(double mu);

// Throws InvalidInput for an empty, non-monotone or negative grid.
QuenchSweep sweep_quench(const ChainSpec& spec, std::span<const double> tdc_grid,
                         const QuenchOptions& options = {});
// Uses default_tdc_grid of the baseline mean tick time.
QuenchSweep sweep_quench(const ChainSpec& spec, const QuenchOptions& options = {});

}  // namespace chainclock
