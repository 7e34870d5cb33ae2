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
#include <limits>

#include "chainclock/spectral.hpp"

namespace chainclock {

// Observation window for tick statistics. Ticks are conditioned on occurring
// in [0, H]:
//   kAsymptotic: H = infinity (the plain closed-form moments);
//   kRelative:   H = value * mu_inf, mu_inf the asymptotic mean;
//   kAbsolute:   H = value.
// Chains whose end-site weights are exponentially small in N (PST-like
// profiles) carry band-edge modes with decay rates near machine precision;
// they make the asymptotic second moment astronomically large while carrying
// a vanishing share of the tick probability. A finite window measures the
// clock that is actually observed.
struct StatisticsWindow {
  enum class Mode { kAsymptotic, kRelative, kAbsolute };
  Mode mode = Mode::kRelative;
  double value = 2.0;

  static StatisticsWindow asymptotic() { return {Mode::kAsymptotic, 0.0}; }
  static StatisticsWindow relative(double factor) { return {Mode::kRelative, factor}; }
  static StatisticsWindow absolute(double horizon) { return {Mode::kAbsolute, horizon}; }

  friend bool operator==(const StatisticsWindow&, const StatisticsWindow&) = default;
};

struct TickStatistics {
  double mu = 0.0;          // mean tick time
  double t2 = 0.0;          // second moment
  double variance = 0.0;    // t2 - mu^2
  double precision = 0.0;   // (mu / sigma)^2
  double resolution = 0.0;  // 1 / mu
  double horizon = std::numeric_limits<double>::infinity();
  double absorbed = 1.0;    // tick probability within the horizon
  double mu_asymptotic = 0.0;
  bool used_fallback = false;  // moments from time-domain quadrature

  friend bool operator==(const TickStatistics&, const TickStatistics&) = default;
};

struct PrtBounds {
  double lower = 0.0;  // gamma / nu
  double upper = 0.0;  // gamma^2 / nu^2

  bool contains(double precision) const { return lower <= precision && precision <= upper; }
};

// n int_0^H t^(n-1) S(t) dt, closed form from the spectral double sum. For
// H = infinity this is (-1)^n n! sum W_{kk'} / a_{kk'}^n.
// Throws ImproperDistribution for H = infinity when some weighted exponent
// has a non-negative real part (trapped population), NumericalFailure when
// the imaginary residue exceeds 1e-10 relative to max(1, |result|).
double survival_moment(const EffectiveSpectrum& spectrum, int n,
                       double horizon = std::numeric_limits<double>::infinity());
// The same double sum before the imaginary part is checked and dropped.
std::complex<double> survival_moment_sum(const EffectiveSpectrum& spectrum, int n,
                                         double horizon = std::numeric_limits<double>::infinity());

// n-th moment of the tick time conditioned on a tick in [0, H]:
//   (n int_0^H t^(n-1) S dt - H^n S(H)) / (1 - S(H)).
// Equals the closed-form asymptotic moment for H = infinity. Degenerate
// spectra and vanishing denominators defer to time-domain quadrature.
double moment(const EffectiveSpectrum& spectrum, int n,
              double horizon = std::numeric_limits<double>::infinity());

// Throws ImproperDistribution when nothing (or not everything, for the
// asymptotic window) is absorbed.
TickStatistics tick_statistics(const EffectiveSpectrum& spectrum,
                               StatisticsWindow window = {});

// Moments by propagation + Gauss-Legendre quadrature; for H = infinity the
// grid is extended until S < 1e-10 and closed with an exponential tail at the
// slowest decay rate 2 min_k |eps^I_k|.
TickStatistics quadrature_statistics(const EffectiveSpectrum& spectrum, double horizon);

PrtBounds prt_bounds(double gamma, double resolution);

}  // namespace chainclock
