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

#include "chainclock/propagation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "chainclock/errors.hpp"

namespace chainclock {

namespace {

// 8-point Gauss-Legendre rule on [0, 1].
constexpr std::array<double, 8> kGlNodes = {
    0.019855071751231856, 0.10166676129318664, 0.2372337950418355, 0.4082826787521751,
    0.5917173212478249,   0.7627662049581645,  0.8983332387068134, 0.9801449282487681};
constexpr std::array<double, 8> kGlWeights = {
    0.05061426814518813, 0.11119051722668724, 0.15685332293894363, 0.18134189168918100,
    0.18134189168918100, 0.15685332293894363, 0.11119051722668724, 0.05061426814518813};

double norm2(const StateVector& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return s;
}

}  // namespace

std::vector<double> uniform_grid(double t_end, double points_per_unit) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw InvalidInput("uniform_grid: t_end must be positive and finite");
  }
  if (!(points_per_unit > 0.0)) throw InvalidInput("uniform_grid: density must be positive");
  const auto steps = static_cast<std::size_t>(std::ceil(t_end * points_per_unit - 1e-9));
  std::vector<double> grid(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    grid[i] = t_end * static_cast<double>(i) / static_cast<double>(steps);
  }
  return grid;
}

Propagator::Propagator(Tridiagonal matrix) : h_(std::move(matrix)) {
  const std::size_t n = h_.size();
  if (n == 0 || h_.off.size() + 1 != n) {
    throw InvalidInput("Propagator: inconsistent tridiagonal matrix");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(h_.diag[i]);
    if (i > 0) row += std::abs(h_.off[i - 1]);
    if (i + 1 < n) row += std::abs(h_.off[i]);
    norm_bound_ = std::max(norm_bound_, row);
  }
  diag_re_.resize(n);
  diag_im_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag_re_[i] = h_.diag[i].real();
    diag_im_[i] = h_.diag[i].imag();
  }
}

StateVector Propagator::site_state(std::size_t site) const {
  if (site < 1 || site > size()) throw InvalidInput("Propagator: site out of range");
  StateVector v(size(), {0.0, 0.0});
  v[site - 1] = 1.0;
  return v;
}

void Propagator::advance(StateVector& state, double dt) const {
  if (state.size() != size()) throw InvalidInput("Propagator::advance: state size mismatch");
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw InvalidInput("Propagator::advance: dt must be finite and non-negative");
  }
  if (dt == 0.0 || norm_bound_ == 0.0) return;
  const double substeps_real = std::ceil(norm_bound_ * dt);
  if (substeps_real > 1e9) throw NumericalFailure("Propagator: step-size underflow");
  const auto substeps = std::max<std::size_t>(1, static_cast<std::size_t>(substeps_real));
  const double h = dt / static_cast<double>(substeps);
  if (h <= std::numeric_limits<double>::epsilon() * dt) {
    throw NumericalFailure("Propagator: step-size underflow");
  }

  // Split real/imaginary storage: H has real off-diagonals, so the matvec
  // vectorizes without complex multiplies.
  const std::size_t n = size();
  // Per-thread scratch: one Propagator may be shared by worker threads.
  thread_local std::vector<double> work;
  if (work.size() < 6 * n) work.resize(6 * n);
  double* sr = work.data();
  double* si = sr + n;
  double* tr = si + n;
  double* ti = tr + n;
  double* nr = ti + n;
  double* ni = nr + n;
  const double* off = h_.off.data();
  const double* dr = diag_re_.data();
  const double* di = diag_im_.data();
  for (std::size_t i = 0; i < n; ++i) {
    sr[i] = state[i].real();
    si[i] = state[i].imag();
  }

  constexpr double kTiny = 1e-17;
  for (std::size_t s = 0; s < substeps; ++s) {
    double state_scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      tr[i] = sr[i];
      ti[i] = si[i];
      state_scale = std::max(state_scale, std::max(std::abs(sr[i]), std::abs(si[i])));
    }
    if (state_scale == 0.0) break;
    for (int k = 1; k <= 60; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        nr[i] = dr[i] * tr[i] - di[i] * ti[i];
        ni[i] = dr[i] * ti[i] + di[i] * tr[i];
      }
      for (std::size_t i = 0; i + 1 < n; ++i) {
        nr[i] += off[i] * tr[i + 1];
        ni[i] += off[i] * ti[i + 1];
        nr[i + 1] += off[i] * tr[i];
        ni[i + 1] += off[i] * ti[i];
      }
      // term <- (-i h / k) H term
      const double c = h / k;
      double term_scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        tr[i] = c * ni[i];
        ti[i] = -c * nr[i];
        sr[i] += tr[i];
        si[i] += ti[i];
        term_scale = std::max(term_scale, std::max(std::abs(tr[i]), std::abs(ti[i])));
      }
      if (term_scale <= kTiny * state_scale) break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) state[i] = {sr[i], si[i]};
}

RealChainPropagator::RealChainPropagator(const ChainSpec& spec)
    : n_(spec.n_sites()),
      lower_(n_, 0.0),
      upper_(n_, 0.0),
      decay_(n_, 0.0),
      phi_(n_ + 2, 0.0),
      term_(n_ + 2, 0.0),
      next_(n_ + 2, 0.0) {
  const auto& j = spec.couplings();
  for (std::size_t i = 0; i + 1 < n_; ++i) {
    upper_[i] = j[i];
    lower_[i + 1] = -j[i];
  }
  decay_[n_ - 1] = -0.5 * spec.gamma();
  for (std::size_t i = 0; i < n_; ++i) {
    norm_bound_ = std::max(norm_bound_,
                           std::abs(lower_[i]) + std::abs(upper_[i]) + std::abs(decay_[i]));
  }
  phi_[1] = 1.0;
}

void RealChainPropagator::advance(double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw InvalidInput("RealChainPropagator::advance: dt must be finite and non-negative");
  }
  if (dt == 0.0) return;
  time_ += dt;
  if (norm_bound_ == 0.0) return;
  if (dt != cached_dt_) {
    const double substeps_real = std::ceil(norm_bound_ * dt);
    if (substeps_real > 1e9) throw NumericalFailure("RealChainPropagator: step-size underflow");
    cached_substeps_ = std::max<std::size_t>(1, static_cast<std::size_t>(substeps_real));
    // Smallest order whose Lagrange remainder bound x^(K+1) / (K+1)! (x <= 1)
    // drops below 1e-17.
    const double x = norm_bound_ * dt / static_cast<double>(cached_substeps_);
    double bound = x;
    int order = 1;
    while (bound / (order + 1) * x > 1e-17 && order < 60) {
      bound = bound * x / (order + 1);
      ++order;
    }
    cached_order_ = order;
    cached_dt_ = dt;
  }
  const double h = dt / static_cast<double>(cached_substeps_);
  const double* lo = lower_.data();
  const double* up = upper_.data();
  const double* g = decay_.data();
  for (std::size_t s = 0; s < cached_substeps_; ++s) {
    std::copy(phi_.begin(), phi_.end(), term_.begin());
    for (int k = 1; k <= cached_order_; ++k) {
      const double c = h / k;
      const double* t = term_.data() + 1;
      double* u = next_.data() + 1;
      double* p = phi_.data() + 1;
      for (std::size_t i = 0; i < n_; ++i) {
        u[i] = c * (lo[i] * t[i - 1] + up[i] * t[i + 1] + g[i] * t[i]);
        p[i] += u[i];
      }
      std::swap(term_, next_);
    }
  }
}

double RealChainPropagator::survival() const {
  double s = 0.0;
  for (std::size_t i = 1; i <= n_; ++i) s += phi_[i] * phi_[i];
  return s;
}

StateVector RealChainPropagator::state() const {
  StateVector psi(n_);
  constexpr std::array<std::complex<double>, 4> kPhase = {
      std::complex<double>{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (std::size_t j = 0; j < n_; ++j) psi[j] = kPhase[j % 4] * phi_[j + 1];
  return psi;
}

PropagatedSeries propagate_timeseries(const Tridiagonal& matrix, std::size_t initial_site,
                                      std::span<const double> grid) {
  if (grid.empty() || grid.front() != 0.0) {
    throw InvalidInput("propagate_timeseries: grid must start at 0");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InvalidInput("propagate_timeseries: grid not monotone");
  }
  const Propagator prop(matrix);
  auto psi = prop.site_state(initial_site);
  const double gamma = matrix.sink_rate();

  PropagatedSeries out;
  out.survival.kind = SeriesKind::kSurvival;
  out.tick_pdf.kind = SeriesKind::kTickPdf;
  out.survival.times.assign(grid.begin(), grid.end());
  out.tick_pdf.times.assign(grid.begin(), grid.end());
  out.survival.values.resize(grid.size());
  out.tick_pdf.values.resize(grid.size());
  double t = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    prop.advance(psi, grid[i] - t);
    t = grid[i];
    out.survival.values[i] = norm2(psi);
    out.tick_pdf.values[i] = gamma * std::norm(psi.back());
  }
  return out;
}

SurvivalAccumulator::SurvivalAccumulator(StateVector initial, double panel)
    : state_(std::move(initial)), panel_(panel) {
  if (!(panel_ > 0.0)) throw InvalidInput("SurvivalAccumulator: panel must be positive");
}

double SurvivalAccumulator::survival() const { return norm2(state_); }

void SurvivalAccumulator::integrate(const Propagator& propagator, double t_end) {
  if (!std::isfinite(t_end)) throw InvalidInput("SurvivalAccumulator: t_end must be finite");
  if (t_end <= time_) return;
  const double width_cap = std::min(panel_, 0.5 / std::max(1e-300, propagator.norm_bound()));
  const auto panels = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil((t_end - time_) / width_cap - 1e-12)));
  const double t0 = time_;
  const double w = (t_end - t0) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = t0 + w * static_cast<double>(p);
    double previous = 0.0;
    for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
      propagator.advance(state_, (kGlNodes[q] - previous) * w);
      previous = kGlNodes[q];
      const double s = norm2(state_);
      integral0_ += kGlWeights[q] * w * s;
      integral1_ += kGlWeights[q] * w * (a + kGlNodes[q] * w) * s;
    }
    propagator.advance(state_, (1.0 - previous) * w);
  }
  time_ = t_end;
}

SurvivalIntegrals integrate_survival(const Propagator& before, const Propagator& after,
                                     double switch_time, StateVector state, double horizon,
                                     double panel) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidInput("integrate_survival: horizon must be positive and finite");
  }
  if (!(switch_time >= 0.0)) throw InvalidInput("integrate_survival: negative switch time");
  SurvivalAccumulator acc(std::move(state), panel);
  acc.integrate(before, std::min(switch_time, horizon));
  acc.integrate(after, horizon);
  return {horizon, acc.survival(), acc.integral0(), acc.integral1()};
}

SurvivalIntegrals integrate_survival(const Propagator& propagator, double horizon, double panel) {
  return integrate_survival(propagator, propagator, horizon, propagator.site_state(1), horizon,
                            panel);
}

}  // namespace chainclock
