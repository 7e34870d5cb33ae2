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

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

namespace {

using cd = std::complex<double>;

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Estimate {
  Pair value;
  Pair error;
};

Estimate kronrod(const std::function<Pair(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  Pair k{}, g{};
  for (std::size_t i = 0; i < 8; ++i) {
    const double w = kKronrodWeights[i];
    if (i == 7) {
      const Pair fc = f(c);
      for (int d = 0; d < 2; ++d) {
        k[d] += w * fc[d];
        g[d] += kGaussWeights[3] * fc[d];
      }
      continue;
    }
    const Pair lo = f(c - h * kKronrodNodes[i]);
    const Pair hi = f(c + h * kKronrodNodes[i]);
    for (int d = 0; d < 2; ++d) {
      k[d] += w * (lo[d] + hi[d]);
      if (i % 2 == 1) g[d] += kGaussWeights[i / 2] * (lo[d] + hi[d]);
    }
  }
  Estimate e;
  for (int d = 0; d < 2; ++d) {
    e.value[d] = h * k[d];
    e.error[d] = std::abs(h * (k[d] - g[d]));
  }
  return e;
}

Pair adapt(const std::function<Pair(double)>& f, double a, double b, const Estimate& whole,
           double rel_tol, double abs_tol, int depth) {
  bool converged = true;
  for (int d = 0; d < 2; ++d) {
    if (whole.error[d] > std::max(abs_tol, rel_tol * std::abs(whole.value[d]))) converged = false;
  }
  if (converged) return whole.value;
  if (depth > 40) throw std::runtime_error("oracle quadrature did not converge");
  const double m = 0.5 * (a + b);
  const Pair left = adapt(f, a, m, kronrod(f, a, m), rel_tol, 0.5 * abs_tol, depth + 1);
  const Pair right = adapt(f, m, b, kronrod(f, m, b), rel_tol, 0.5 * abs_tol, depth + 1);
  return {left[0] + right[0], left[1] + right[1]};
}

}  // namespace

Eigen::MatrixXcd effective_matrix(const std::vector<double>& couplings, double gamma) {
  const auto n = static_cast<Eigen::Index>(couplings.size() + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    h(i, i + 1) = couplings[static_cast<std::size_t>(i)];
    h(i + 1, i) = couplings[static_cast<std::size_t>(i)];
  }
  h(n - 1, n - 1) = cd(0.0, -0.5 * gamma);
  return h;
}

DenseEvolution::DenseEvolution(const std::vector<double>& couplings, double gamma,
                               std::size_t site)
    : h_(effective_matrix(couplings, gamma)), gamma_(gamma) {
  const double norm = h_.cwiseAbs().rowwise().sum().maxCoeff();
  dt_ = 0.5 / std::max(norm, 1e-3);
  const Eigen::MatrixXcd generator = cd(0.0, -dt_) * h_;
  step_ = generator.exp();
  Eigen::VectorXcd start = Eigen::VectorXcd::Zero(h_.rows());
  start(static_cast<Eigen::Index>(site - 1)) = 1.0;
  checkpoints_.push_back(start);
}

Eigen::VectorXcd DenseEvolution::state(double t) {
  if (t < 0) throw std::invalid_argument("negative time");
  const auto k = static_cast<std::size_t>(std::floor(t / dt_));
  while (checkpoints_.size() <= k) checkpoints_.push_back(step_ * checkpoints_.back());
  const double s = t - static_cast<double>(k) * dt_;
  Eigen::VectorXcd term = checkpoints_[k];
  Eigen::VectorXcd sum = term;
  for (int order = 1; order < 60; ++order) {
    term = (cd(0.0, -s / order) * h_) * term;
    sum += term;
    if (term.norm() < 1e-18 * sum.norm()) break;
  }
  return sum;
}

double DenseEvolution::tick_density(double t) {
  const auto psi = state(t);
  return gamma_ * std::norm(psi(psi.size() - 1));
}

Pair integrate(const std::function<Pair(double)>& f, double a, double b, double rel_tol,
               double abs_tol) {
  return adapt(f, a, b, kronrod(f, a, b), rel_tol, abs_tol, 0);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol) {
  return integrate([&](double t) { return Pair{f(t), 0.0}; }, a, b, rel_tol, abs_tol)[0];
}

Moments windowed_moments(DenseEvolution& evolution, double horizon) {
  const auto f = [&](double t) {
    const double s = evolution.survival(t);
    return Pair{s, t * s};
  };
  Pair total{};
  const auto panels = static_cast<std::size_t>(std::ceil(horizon));
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = horizon * static_cast<double>(p) / static_cast<double>(panels);
    const double b = horizon * static_cast<double>(p + 1) / static_cast<double>(panels);
    const Pair part = integrate(f, a, b, 1e-13, 1e-17);
    total[0] += part[0];
    total[1] += part[1];
  }
  const double s_end = evolution.survival(horizon);
  Moments m;
  m.absorbed = 1.0 - s_end;
  m.mu = (total[0] - horizon * s_end) / m.absorbed;
  m.t2 = (2.0 * total[1] - horizon * horizon * s_end) / m.absorbed;
  return m;
}

Moments asymptotic_moments(DenseEvolution& evolution, double cutoff) {
  const auto f = [&](double t) {
    const double s = evolution.survival(t);
    return Pair{s, t * s};
  };
  Pair total{};
  double t = 0.0;
  constexpr double kPanel = 1.0;
  while (evolution.survival(t) > cutoff) {
    const Pair part = integrate(f, t, t + kPanel, 1e-13, 1e-17);
    total[0] += part[0];
    total[1] += part[1];
    t += kPanel;
    if (t > 1e7) throw std::runtime_error("survival does not decay");
  }
  // Exponential closure: S(t' > t) ~ S(t) exp(-r (t' - t)).
  const double back = std::min(t, 20.0);
  const double s_end = evolution.survival(t);
  const double r = std::log(evolution.survival(t - back) / s_end) / back;
  total[0] += s_end / r;
  total[1] += s_end * (t / r + 1.0 / (r * r));
  return {total[0], 2.0 * total[1], 1.0};
}

double window_cost(DenseEvolution& evolution, double window, double dt, double lambda) {
  double sum = 0.0;
  for (int m = 1; m * dt <= window * (1.0 + 1e-12); ++m) {
    const double t = m * dt;
    const double s = evolution.survival(t);
    sum += t <= 0.5 * window * (1.0 + 1e-12) ? (1.0 - s) * (1.0 - s) : lambda * s * s;
  }
  return sum;
}

}  // namespace oracle
