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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "chainclock/chain_model.hpp"

namespace chainclock {

using StateVector = std::vector<std::complex<double>>;

enum class SeriesKind { kSurvival, kTickPdf, kFidelity };

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  SeriesKind kind = SeriesKind::kSurvival;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

// Uniform grid on [0, t_end] with the given density (points per 1/gamma).
// The last point is exactly t_end.
std::vector<double> uniform_grid(double t_end, double points_per_unit = 20.0);

// Time-domain evolution psi(t) = exp(-i H t) psi(0) for a complex symmetric
// tridiagonal H, by a truncated Taylor series on substeps with
// ||H|| * substep <= 1. Truncation is at double-precision round-off, so the
// norm error per unit time stays far below 1e-9.
class Propagator {
 public:
  explicit Propagator(Tridiagonal matrix);
  explicit Propagator(const ChainSpec& spec) : Propagator(Tridiagonal::effective(spec)) {}

  std::size_t size() const { return h_.size(); }
  const Tridiagonal& matrix() const { return h_; }
  // Gershgorin bound on ||H||.
  double norm_bound() const { return norm_bound_; }

  // Advances state by dt >= 0 in place.
  void advance(StateVector& state, double dt) const;

  StateVector site_state(std::size_t site) const;  // 1-based site

 private:
  Tridiagonal h_;
  double norm_bound_ = 0.0;
  std::vector<double> diag_re_, diag_im_;
};

// Evolution of |1> for an XX chain with a purely absorbing diagonal. In the
// gauge psi_j = i^(j-1) phi_j the generator -iH becomes real,
//   dphi_j/dt = -J_{j-1} phi_{j-1} + J_j phi_{j+1} - (gamma_j / 2) phi_j,
// so phi stays real and S = sum phi_j^2 costs half a complex propagation.
// The Taylor order is fixed a priori from the Gershgorin bound.
class RealChainPropagator {
 public:
  explicit RealChainPropagator(const ChainSpec& spec);

  void advance(double dt);
  double survival() const;
  double time() const { return time_; }
  // psi_j recovered from the real gauge, 1-based sites.
  StateVector state() const;

 private:
  std::size_t n_;
  std::vector<double> lower_, upper_, decay_;
  std::vector<double> phi_, term_, next_;  // padded with one zero on each side
  double norm_bound_ = 0.0;
  double time_ = 0.0;
  double cached_dt_ = -1.0;
  std::size_t cached_substeps_ = 0;
  int cached_order_ = 0;
};

struct PropagatedSeries {
  TimeSeries survival;
  TimeSeries tick_pdf;
};

// Evolves |initial_site> over a monotone grid starting at 0 and records
// <psi|psi> and gamma |psi_N|^2 at every grid point.
PropagatedSeries propagate_timeseries(const Tridiagonal& matrix, std::size_t initial_site,
                                      std::span<const double> grid);

// Running integrals of the survival curve S = <psi|psi>, accumulated by
// composite 8-point Gauss-Legendre quadrature on panels of width
// <= min(panel, 0.5 / ||H||) with psi at every node obtained by propagation.
class SurvivalAccumulator {
 public:
  explicit SurvivalAccumulator(StateVector initial, double panel = 0.05);

  // Evolves with `propagator` from time() to t_end.
  void integrate(const Propagator& propagator, double t_end);

  double time() const { return time_; }
  double survival() const;
  double integral0() const { return integral0_; }  // int_0^t S dt
  double integral1() const { return integral1_; }  // int_0^t t S dt
  const StateVector& state() const { return state_; }

 private:
  StateVector state_;
  double panel_;
  double time_ = 0.0;
  double integral0_ = 0.0;
  double integral1_ = 0.0;
};

struct SurvivalIntegrals {
  double horizon = 0.0;
  double s_end = 1.0;      // S(horizon)
  double integral0 = 0.0;  // int_0^H S dt
  double integral1 = 0.0;  // int_0^H t S dt
};

// Evolves `state` from t = 0 with `before` until `switch_time`, then with
// `after`. Pass switch_time >= horizon for a single Hamiltonian.
SurvivalIntegrals integrate_survival(const Propagator& before, const Propagator& after,
                                     double switch_time, StateVector state, double horizon,
                                     double panel = 0.05);
SurvivalIntegrals integrate_survival(const Propagator& propagator, double horizon,
                                     double panel = 0.05);

}  // namespace chainclock
