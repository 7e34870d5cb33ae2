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

#include "chainclock/clock_metrics.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "chainclock/errors.hpp"

namespace chainclock {

namespace {

using cd = std::complex<double>;

constexpr double kImagResidue = 1e-10;
// Population below this is never observable; unresolved modes carrying less
// are dropped from the asymptotic sums.
constexpr double kNegligibleWeight = 1e-12;
constexpr double kSurvivalFloor = 1e-10;
constexpr double kMaxQuadratureTime = 1e5;

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

// int_0^h t^m exp(a t) dt. Power series for small |a h|, closed form otherwise.
cd power_exp_integral(int m, cd a, double h) {
  const cd x = a * h;
  if (std::abs(x) < 2.0 + m) {
    cd term{1.0, 0.0};
    cd sum{0.0, 0.0};
    for (int p = 0; p < 200; ++p) {
      if (p > 0) term *= x / static_cast<double>(p);
      const cd contribution = term / static_cast<double>(m + p + 1);
      sum += contribution;
      if (std::abs(contribution) <= 1e-18 * std::abs(sum)) break;
    }
    return sum * std::pow(h, m + 1);
  }
  cd partial{0.0, 0.0};
  cd term{1.0, 0.0};
  for (int j = 0; j <= m; ++j) {
    if (j > 0) term *= -x / static_cast<double>(j);
    partial += term;
  }
  return factorial(m) / std::pow(-a, m + 1) * (1.0 - std::exp(x) * partial);
}

double real_checked(cd value, const char* what) {
  if (std::abs(value.imag()) > kImagResidue * std::max(1.0, std::abs(value.real()))) {
    throw NumericalFailure(std::string(what) + ": imaginary residue " +
                           std::to_string(value.imag()) + " exceeds tolerance");
  }
  return value.real();
}

double horizon_for(const StatisticsWindow& window, double mu_asymptotic) {
  switch (window.mode) {
    case StatisticsWindow::Mode::kAsymptotic:
      return std::numeric_limits<double>::infinity();
    case StatisticsWindow::Mode::kRelative:
      if (!(window.value > 0.0)) throw InvalidInput("StatisticsWindow: factor must be > 0");
      return window.value * mu_asymptotic;
    case StatisticsWindow::Mode::kAbsolute:
      if (!(window.value > 0.0)) throw InvalidInput("StatisticsWindow: horizon must be > 0");
      return window.value;
  }
  throw InvalidInput("StatisticsWindow: unknown mode");
}

TickStatistics finish(double mu, double t2) {
  TickStatistics st;
  st.mu = mu;
  st.t2 = t2;
  st.variance = t2 - mu * mu;
  if (!(mu > 0.0) || !(st.variance > 0.0) || !std::isfinite(st.variance)) {
    throw NumericalFailure("tick statistics: non-positive mean or variance (mu=" +
                           std::to_string(mu) + ", t2=" + std::to_string(t2) + ")");
  }
  st.precision = mu * mu / st.variance;
  st.resolution = 1.0 / mu;
  return st;
}

}  // namespace

std::complex<double> survival_moment_sum(const EffectiveSpectrum& spectrum, int n,
                                         double horizon) {
  if (n < 1) throw InvalidInput("survival_moment: n must be >= 1");
  if (!(horizon > 0.0)) throw InvalidInput("survival_moment: horizon must be > 0");
  if (spectrum.degenerate) {
    throw NumericalFailure("survival_moment: closed form needs a non-degenerate spectrum");
  }
  const SurvivalKernel kernel(spectrum);
  const auto& w = kernel.weights();
  const auto& a = kernel.exponents();
  const auto size = w.rows();
  cd sum{0.0, 0.0};
  if (std::isinf(horizon)) {
    const double scale = std::max(1.0, spectrum.eigenvalues.cwiseAbs().maxCoeff());
    const double resolved = -1e-14 * scale;
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    const double nfact = factorial(n);
    for (Eigen::Index k = 0; k < size; ++k) {
      for (Eigen::Index kp = 0; kp < size; ++kp) {
        if (a(k, kp).real() >= resolved) {
          if (std::abs(w(k, kp)) > kNegligibleWeight) {
            throw ImproperDistribution(
                "survival_moment: non-decaying mode carries population; tick distribution is "
                "improper");
          }
          continue;
        }
        sum += w(k, kp) / std::pow(a(k, kp), n);
      }
    }
    sum *= sign * nfact;
  } else {
    for (Eigen::Index k = 0; k < size; ++k) {
      for (Eigen::Index kp = 0; kp < size; ++kp) {
        sum += w(k, kp) * power_exp_integral(n - 1, a(k, kp), horizon);
      }
    }
    sum *= static_cast<double>(n);
  }
  return sum;
}

double survival_moment(const EffectiveSpectrum& spectrum, int n, double horizon) {
  return real_checked(survival_moment_sum(spectrum, n, horizon), "survival_moment");
}

double moment(const EffectiveSpectrum& spectrum, int n, double horizon) {
  if (n < 1) throw InvalidInput("moment: n must be >= 1");
  if (spectrum.degenerate) {
    if (n > 2) throw UnsupportedInput("moment: quadrature fallback supports n <= 2");
    const auto st = quadrature_statistics(spectrum, horizon);
    return n == 1 ? st.mu : st.t2;
  }
  if (std::isinf(horizon)) return survival_moment(spectrum, n, horizon);
  const double s_end = survival(spectrum, horizon);
  const double absorbed = 1.0 - s_end;
  if (!(absorbed > 1e-12)) {
    throw ImproperDistribution("moment: no tick probability within the window");
  }
  return (survival_moment(spectrum, n, horizon) - std::pow(horizon, n) * s_end) / absorbed;
}

TickStatistics tick_statistics(const EffectiveSpectrum& spectrum, StatisticsWindow window) {
  if (spectrum.degenerate) {
    double mu_inf = std::numeric_limits<double>::quiet_NaN();
    if (window.mode == StatisticsWindow::Mode::kRelative) {
      mu_inf = quadrature_statistics(spectrum, std::numeric_limits<double>::infinity()).mu;
    }
    auto st = quadrature_statistics(spectrum, horizon_for(window, mu_inf));
    st.mu_asymptotic = mu_inf;
    return st;
  }

  double mu_inf = std::numeric_limits<double>::quiet_NaN();
  if (window.mode == StatisticsWindow::Mode::kAbsolute) {
    try {
      mu_inf = survival_moment(spectrum, 1);
    } catch (const ImproperDistribution&) {
      // Trapped population: only the windowed statistics exist.
    }
  } else {
    mu_inf = survival_moment(spectrum, 1);
  }
  const double horizon = horizon_for(window, mu_inf);

  TickStatistics st;
  if (std::isinf(horizon)) {
    st = finish(mu_inf, survival_moment(spectrum, 2));
    st.absorbed = 1.0;
  } else {
    const double s_end = survival(spectrum, horizon);
    const double absorbed = 1.0 - s_end;
    if (!(absorbed > 1e-12)) {
      throw ImproperDistribution("tick_statistics: no tick probability within the window");
    }
    const double mu = (survival_moment(spectrum, 1, horizon) - horizon * s_end) / absorbed;
    const double t2 =
        (survival_moment(spectrum, 2, horizon) - horizon * horizon * s_end) / absorbed;
    st = finish(mu, t2);
    st.absorbed = absorbed;
  }
  st.horizon = horizon;
  st.mu_asymptotic = mu_inf;
  return st;
}

TickStatistics quadrature_statistics(const EffectiveSpectrum& spectrum, double horizon) {
  if (!(horizon > 0.0)) throw InvalidInput("quadrature_statistics: horizon must be > 0");
  const Propagator prop(spectrum.source);
  SurvivalAccumulator acc(prop.site_state(1));
  TickStatistics st;
  if (std::isfinite(horizon)) {
    acc.integrate(prop, horizon);
    const double s_end = acc.survival();
    const double absorbed = 1.0 - s_end;
    if (!(absorbed > 1e-12)) {
      throw ImproperDistribution("quadrature_statistics: no tick probability within the window");
    }
    st = finish((acc.integral0() - horizon * s_end) / absorbed,
                (2.0 * acc.integral1() - horizon * horizon * s_end) / absorbed);
    st.absorbed = absorbed;
  } else {
    double slowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < spectrum.eigenvalues.size(); ++k) {
      slowest = std::min(slowest, std::abs(spectrum.eigenvalues(k).imag()));
    }
    const double rate = 2.0 * slowest;
    if (!(rate > 0.0)) {
      throw ImproperDistribution("quadrature_statistics: a mode never decays");
    }
    double chunk = std::max(1.0, 1.0 / std::max(spectrum.gamma(), 1e-300));
    while (acc.survival() >= kSurvivalFloor) {
      if (acc.time() > kMaxQuadratureTime) {
        throw NumericalFailure("quadrature_statistics: survival did not fall below 1e-10 by t=" +
                               std::to_string(acc.time()));
      }
      acc.integrate(prop, acc.time() + chunk);
      chunk *= 1.5;
    }
    const double t_end = acc.time();
    const double s_end = acc.survival();
    const double tail0 = s_end / rate;
    const double tail1 = s_end * (t_end / rate + 1.0 / (rate * rate));
    st = finish(acc.integral0() + tail0, 2.0 * (acc.integral1() + tail1));
    st.absorbed = 1.0;
  }
  st.horizon = horizon;
  st.used_fallback = true;
  return st;
}

PrtBounds prt_bounds(double gamma, double resolution) {
  if (!(gamma > 0.0) || !(resolution > 0.0)) {
    throw InvalidInput("prt_bounds: gamma and resolution must be > 0");
  }
  const double ratio = gamma / resolution;
  return {ratio, ratio * ratio};
}

}  // namespace chainclock
