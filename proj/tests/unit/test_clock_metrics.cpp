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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracle.hpp"

#include "chainclock/clock_metrics.hpp"
#include "chainclock/errors.hpp"

using namespace chainclock;

namespace {

// Two-site chain, from the Lyapunov equations A X + X A^dag = -rho for the
// time integrals of rho(t) (A = -i H):
//   mu = 2/g + g/(4 J^2),  t2 = (64 J^4 + 4 J^2 g^2 + g^4) / (8 J^4 g^2).
double two_site_mu(double j, double g) { return 2.0 / g + g / (4.0 * j * j); }
double two_site_t2(double j, double g) {
  const double j2 = j * j, j4 = j2 * j2, g2 = g * g;
  return (64.0 * j4 + 4.0 * j2 * g2 + g2 * g2) / (8.0 * j4 * g2);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("two-site closed-form moments") {
  for (auto [j, g] : {std::pair{0.6, 1.3}, std::pair{2.0, 1.0}, std::pair{0.05, 0.9}}) {
    const auto s = decompose_effective(ChainSpec({j}, g));
    CHECK(rel(survival_moment(s, 1), two_site_mu(j, g)) < 1e-11);
    CHECK(rel(survival_moment(s, 2), two_site_t2(j, g)) < 1e-11);
    CHECK(rel(moment(s, 1), two_site_mu(j, g)) < 1e-11);
    const auto st = tick_statistics(s, StatisticsWindow::asymptotic());
    const double mu = two_site_mu(j, g), t2 = two_site_t2(j, g);
    CHECK(rel(st.precision, mu * mu / (t2 - mu * mu)) < 1e-10);
    CHECK(rel(st.resolution, 1.0 / mu) < 1e-12);
    CHECK(std::isinf(st.horizon));
    CHECK(st.absorbed == 1.0);
  }
}

TEST_CASE("exceptional point uses the quadrature fallback") {
  const auto s = decompose_effective(ChainSpec({0.25}, 1.0));
  REQUIRE(s.degenerate);
  const auto st = tick_statistics(s, StatisticsWindow::asymptotic());
  CHECK(st.used_fallback);
  CHECK(rel(st.mu, two_site_mu(0.25, 1.0)) < 1e-7);
  CHECK(rel(st.t2, two_site_t2(0.25, 1.0)) < 1e-6);
}

TEST_CASE("windowed moments match quadrature of propagated survival") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.1, 1.2);
  for (std::size_t n : {3u, 8u, 15u}) {
    std::vector<double> j(n - 1);
    for (auto& x : j) x = u(rng);
    const ChainSpec spec(j, 1.0);
    const auto s = decompose_effective(spec);
    oracle::DenseEvolution ref(j, 1.0);
    const double horizon = 3.0 * static_cast<double>(n);
    const auto want = oracle::windowed_moments(ref, horizon);
    CHECK(rel(moment(s, 1, horizon), want.mu) < 1e-9);
    CHECK(rel(moment(s, 2, horizon), want.t2) < 1e-9);

    const auto st = tick_statistics(s, StatisticsWindow::absolute(horizon));
    CHECK(st.horizon == horizon);
    CHECK(rel(st.absorbed, want.absorbed) < 1e-10);
    const auto quad = quadrature_statistics(s, horizon);
    CHECK(rel(quad.mu, st.mu) < 1e-9);
    CHECK(rel(quad.t2, st.t2) < 1e-9);
  }
}

TEST_CASE("asymptotic moments match quadrature with a tail closure") {
  const ChainSpec spec(std::vector<double>(5, 0.8), 1.0);
  const auto s = decompose_effective(spec);
  oracle::DenseEvolution ref(spec.couplings(), 1.0);
  const auto want = oracle::asymptotic_moments(ref);
  CHECK(rel(survival_moment(s, 1), want.mu) < 1e-8);
  CHECK(rel(survival_moment(s, 2), want.t2) < 1e-8);
  const auto quad = quadrature_statistics(s, std::numeric_limits<double>::infinity());
  CHECK(rel(quad.mu, want.mu) < 1e-7);
}

TEST_CASE("windows") {
  const ChainSpec spec({0.4, 0.6, 0.4}, 1.0);
  const auto s = decompose_effective(spec);
  const double mu_inf = survival_moment(s, 1);
  const auto st = tick_statistics(s, StatisticsWindow::relative(2.0));
  CHECK(st.horizon == doctest::Approx(2.0 * mu_inf).epsilon(1e-14));
  CHECK(st.mu_asymptotic == doctest::Approx(mu_inf).epsilon(1e-14));
  CHECK(st.absorbed == doctest::Approx(1.0 - survival(s, st.horizon)).epsilon(1e-12));
  CHECK(st.mu < st.horizon);
  CHECK(st.variance == doctest::Approx(st.t2 - st.mu * st.mu));
  CHECK_THROWS_AS(tick_statistics(s, StatisticsWindow::relative(0.0)), InvalidInput);
  CHECK_THROWS_AS(tick_statistics(s, StatisticsWindow::absolute(-1.0)), InvalidInput);

  // Large windows converge to the asymptotic moments.
  const auto wide = tick_statistics(s, StatisticsWindow::relative(200.0));
  const auto inf = tick_statistics(s, StatisticsWindow::asymptotic());
  CHECK(rel(wide.mu, inf.mu) < 1e-9);
  CHECK(rel(wide.precision, inf.precision) < 1e-7);
}

TEST_CASE("closed chains never tick") {
  const auto s = decompose_effective(ChainSpec({0.4, 0.6}, 0.0));
  CHECK_THROWS_AS(survival_moment(s, 1), ImproperDistribution);
  CHECK_THROWS_AS(tick_statistics(s, StatisticsWindow::asymptotic()), ImproperDistribution);
  CHECK_THROWS_AS(tick_statistics(s, StatisticsWindow::absolute(10.0)), ImproperDistribution);
  CHECK_THROWS_AS(survival_moment(s, 0), InvalidInput);
}

TEST_CASE("precision-resolution bounds") {
  const auto b = prt_bounds(1.0, 0.0121489);
  CHECK(b.lower == doctest::Approx(1.0 / 0.0121489));
  CHECK(b.upper == doctest::Approx(1.0 / (0.0121489 * 0.0121489)));
  CHECK(b.contains(362.9));
  CHECK_FALSE(b.contains(50.0));
  CHECK_THROWS_AS(prt_bounds(0.0, 0.1), InvalidInput);
  CHECK_THROWS_AS(prt_bounds(1.0, -0.1), InvalidInput);
}
