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

// Reference implementations used only by tests. Nothing here calls into the
// library: the chain matrix is rebuilt from the couplings, time evolution is
// a dense matrix exponential, and integrals use adaptive Gauss-Kronrod.

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

Eigen::MatrixXcd effective_matrix(const std::vector<double>& couplings, double gamma);

// psi(t) = exp(-i H t) |site>, with exp(-i H step) from Eigen's Pade-based
// matrix exponential between cached checkpoints and a dense Taylor series
// inside a step.
class DenseEvolution {
 public:
  DenseEvolution(const std::vector<double>& couplings, double gamma, std::size_t site = 1);

  Eigen::VectorXcd state(double t);
  double survival(double t) { return state(t).squaredNorm(); }
  // gamma |psi_N(t)|^2
  double tick_density(double t);
  std::size_t size() const { return static_cast<std::size_t>(h_.rows()); }

 private:
  Eigen::MatrixXcd h_;
  Eigen::MatrixXcd step_;
  double gamma_;
  double dt_;
  std::vector<Eigen::VectorXcd> checkpoints_;
};

// Adaptive 15-point Gauss-Kronrod on [a, b] for a pair of integrands.
using Pair = std::array<double, 2>;
Pair integrate(const std::function<Pair(double)>& f, double a, double b, double rel_tol = 1e-12,
               double abs_tol = 1e-16);
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_tol = 1e-16);

struct Moments {
  double mu = 0.0;
  double t2 = 0.0;
  double absorbed = 0.0;
};

// Moments of the tick time conditioned on a tick in [0, horizon], from
// quadrature of S(t) and t S(t) over unit panels.
Moments windowed_moments(DenseEvolution& evolution, double horizon);

// Unconditional moments, integrating until S(t) < cutoff and closing the
// tail with the local exponential decay rate of S.
Moments asymptotic_moments(DenseEvolution& evolution, double cutoff = 1e-15);

// Discretized objective of the optimizer, written from its definition:
// sum over t_m = m dt, m = 1..M with M = floor(T / dt): (1 - S)^2 for
// t_m <= T/2, lambda S^2 beyond.
double window_cost(DenseEvolution& evolution, double window, double dt, double lambda);

}  // namespace oracle
