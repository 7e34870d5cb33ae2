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

#include "chainclock/quench.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "chainclock/de_optimizer.hpp"
#include "chainclock/errors.hpp"
#include "chainclock/spectral.hpp"

namespace chainclock {

namespace {

void check_grid(std::span<const double> grid, const char* what) {
  if (grid.empty()) throw InvalidInput(std::string(what) + ": empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) {
      throw InvalidInput(std::string(what) + ": grid values must be finite and >= 0");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw InvalidInput(std::string(what) + ": grid must be strictly increasing");
    }
  }
}

TickStatistics conditional(double horizon, double s_end, double integral0, double integral1,
                           double floor) {
  const double absorbed = 1.0 - s_end;
  if (!(absorbed > floor)) {
    throw NoTick("absorbed fraction " + std::to_string(absorbed) + " is below the floor " +
                 std::to_string(floor));
  }
  TickStatistics st;
  st.mu = (integral0 - horizon * s_end) / absorbed;
  st.t2 = (2.0 * integral1 - horizon * horizon * s_end) / absorbed;
  st.variance = st.t2 - st.mu * st.mu;
  if (!(st.variance > 0.0)) throw NumericalFailure("quench: non-positive tick variance");
  st.precision = st.mu * st.mu / st.variance;
  st.resolution = 1.0 / st.mu;
  st.horizon = horizon;
  st.absorbed = absorbed;
  st.mu_asymptotic = std::numeric_limits<double>::quiet_NaN();
  st.used_fallback = true;
  return st;
}

double baseline_horizon(const TickStatistics& baseline) {
  if (!std::isfinite(baseline.horizon)) {
    throw InvalidInput("quench: the statistics window must be finite (relative or absolute)");
  }
  return baseline.horizon;
}

}  // namespace

TimeSeries piecewise_survival(const ChainSpec& spec, double t_dc, std::span<const double> grid) {
  if (!(t_dc >= 0.0) || !std::isfinite(t_dc)) {
    throw InvalidInput("piecewise_survival: t_dc must be finite and >= 0");
  }
  check_grid(grid, "piecewise_survival");
  if (grid.front() != 0.0) throw InvalidInput("piecewise_survival: grid must start at 0");
  if (t_dc > grid.back()) {
    throw InvalidInput("piecewise_survival: grid ends before the decoupling time");
  }
  const Propagator before(spec);
  const Propagator after(quench_decouple_first(spec));
  auto psi = before.site_state(1);
  TimeSeries out;
  out.kind = SeriesKind::kSurvival;
  out.times.assign(grid.begin(), grid.end());
  out.values.reserve(grid.size());
  double t = 0.0;
  bool switched = false;
  for (double target : grid) {
    if (!switched && target >= t_dc) {
      before.advance(psi, t_dc - t);
      t = t_dc;
      switched = true;
    }
    (switched ? after : before).advance(psi, target - t);
    t = target;
    double s = 0.0;
    for (const auto& z : psi) s += std::norm(z);
    out.values.push_back(s);
  }
  return out;
}

double effective_precision(const TimeSeries& survival, double absorbed_floor) {
  const auto& t = survival.times;
  const auto& s = survival.values;
  if (t.size() != s.size() || t.size() < 2) {
    throw InvalidInput("effective_precision: need at least two samples");
  }
  if (t.front() != 0.0) throw InvalidInput("effective_precision: series must start at t = 0");
  double integral0 = 0.0;
  double integral1 = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double h = t[i] - t[i - 1];
    if (!(h > 0.0)) throw InvalidInput("effective_precision: times must increase");
    integral0 += 0.5 * h * (s[i] + s[i - 1]);
    integral1 += 0.5 * h * (t[i] * s[i] + t[i - 1] * s[i - 1]);
  }
  return conditional(t.back(), s.back(), integral0, integral1, absorbed_floor).precision;
}

TickStatistics quench_statistics(const ChainSpec& spec, double t_dc, double horizon,
                                 const QuenchOptions& options) {
  if (!(t_dc >= 0.0)) throw InvalidInput("quench_statistics: t_dc must be >= 0");
  const Propagator before(spec);
  const Propagator after(quench_decouple_first(spec));
  const auto r =
      integrate_survival(before, after, t_dc, before.site_state(1), horizon, options.panel);
  return conditional(horizon, r.s_end, r.integral0, r.integral1, options.absorbed_floor);
}

double QuenchSweep::onset_ratio() const {
  return plateau_onset ? *plateau_onset / baseline_mu : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw InvalidInput("log_grid: need 0 < lo < hi and n >= 2");
  }
  std::vector<double> grid(n);
  const double step = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo * std::exp(step * static_cast<double>(i));
  grid.back() = hi;
  return grid;
}

std::vector<double> default_tdc_grid(double mu) { return log_grid(1e-2, mu, 60); }

QuenchSweep sweep_quench(const ChainSpec& spec, std::span<const double> tdc_grid,
                         const QuenchOptions& options) {
  check_grid(tdc_grid, "sweep_quench");
  const auto baseline = tick_statistics(decompose_effective(spec), options.window);
  const double horizon = baseline_horizon(baseline);

  QuenchSweep sweep;
  sweep.n_sites = spec.n_sites();
  sweep.tdc_grid.assign(tdc_grid.begin(), tdc_grid.end());
  sweep.baseline = baseline.precision;
  sweep.baseline_mu = baseline.mu;
  sweep.horizon = horizon;

  // The unquenched evolution up to each t_dc is shared: snapshot it once,
  // then finish every point independently under the quenched matrix.
  const Propagator before(spec);
  const Propagator after(quench_decouple_first(spec));
  std::vector<SurvivalAccumulator> snapshots;
  snapshots.reserve(tdc_grid.size());
  SurvivalAccumulator running(before.site_state(1), options.panel);
  for (double t_dc : tdc_grid) {
    running.integrate(before, std::min(t_dc, horizon));
    snapshots.push_back(running);
  }

  sweep.points.resize(tdc_grid.size());
  parallel_for(tdc_grid.size(), options.threads, [&](std::size_t i) {
    auto acc = snapshots[i];
    auto& point = sweep.points[i];
    point.t_dc = tdc_grid[i];
    point.trapped = std::norm(acc.state().front());
    acc.integrate(after, horizon);
    point.absorbed = 1.0 - acc.survival();
    try {
      const auto st = conditional(horizon, acc.survival(), acc.integral0(), acc.integral1(),
                                  options.absorbed_floor);
      point.n_eff = st.precision;
      point.mu = st.mu;
    } catch (const NoTick&) {
      point.n_eff.reset();
    }
  });

  sweep.n_eff.reserve(sweep.points.size());
  const double threshold = options.plateau_fraction * sweep.baseline;
  for (const auto& p : sweep.points) {
    sweep.n_eff.push_back(p.n_eff);
    if (!sweep.plateau_onset && p.n_eff && *p.n_eff >= threshold) sweep.plateau_onset = p.t_dc;
  }
  return sweep;
}

QuenchSweep sweep_quench(const ChainSpec& spec, const QuenchOptions& options) {
  const auto baseline = tick_statistics(decompose_effective(spec), options.window);
  const auto grid = default_tdc_grid(baseline.mu);
  return sweep_quench(spec, grid, options);
}

}  // namespace chainclock
