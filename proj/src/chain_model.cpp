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

#include "chainclock/chain_model.hpp"

#include <cmath>
#include <string>

#include "chainclock/errors.hpp"

namespace chainclock {

ChainSpec::ChainSpec(std::vector<double> couplings, double gamma, QuenchPolicy policy)
    : couplings_(std::move(couplings)), gamma_(gamma) {
  if (couplings_.empty()) {
    throw InvalidInput("ChainSpec: a chain needs at least two sites");
  }
  if (!std::isfinite(gamma_) || gamma_ < 0.0) {
    throw InvalidInput("ChainSpec: gamma must be finite and non-negative");
  }
  for (std::size_t i = 0; i < couplings_.size(); ++i) {
    const double j = couplings_[i];
    const bool zero_ok = i == 0 && policy == QuenchPolicy::kAllowFirstBondZero;
    if (!std::isfinite(j) || j < 0.0 || (j == 0.0 && !zero_ok)) {
      throw InvalidInput("ChainSpec: coupling J_" + std::to_string(i + 1) +
                         " = " + std::to_string(j) + " must be finite and positive");
    }
  }
}

double ChainSpec::bond(std::size_t i) const {
  if (i < 1 || i > couplings_.size()) {
    throw InvalidInput("ChainSpec::bond: index out of range");
  }
  return couplings_[i - 1];
}

ChainSpec ChainSpec::with_gamma(double gamma) const {
  return ChainSpec(couplings_, gamma,
                   quenched() ? QuenchPolicy::kAllowFirstBondZero : QuenchPolicy::kReject);
}

std::vector<double> pst_couplings(std::size_t n_sites, double j0) {
  if (n_sites < 2) throw InvalidInput("pst_couplings: n_sites must be >= 2");
  if (!(j0 > 0.0) || !std::isfinite(j0)) throw InvalidInput("pst_couplings: j0 must be > 0");
  const auto n = static_cast<double>(n_sites);
  std::vector<double> out(n_sites - 1);
  for (std::size_t i = 1; i < n_sites; ++i) {
    const auto x = static_cast<double>(i);
    out[i - 1] = j0 * std::sqrt(x * (n - x));
  }
  return out;
}

ChainSpec expand_profile(const CouplingProfile& profile, std::size_t n_sites, double gamma) {
  if (n_sites < 2) throw InvalidInput("expand_profile: n_sites must be >= 2");
  switch (profile.kind) {
    case ProfileKind::kPst:
      if (!profile.tail_overrides.empty() || profile.tail_count != 0) {
        throw InvalidInput("expand_profile: plain PST profile takes no tail overrides");
      }
      return ChainSpec(pst_couplings(n_sites, profile.j0), gamma);
    case ProfileKind::kPstWithTailOverrides: {
      if (profile.tail_count != profile.tail_overrides.size()) {
        throw InvalidInput("expand_profile: declared tail count " +
                           std::to_string(profile.tail_count) + " but " +
                           std::to_string(profile.tail_overrides.size()) + " overrides given");
      }
      if (profile.tail_count >= n_sites) {
        throw InvalidInput("expand_profile: tail count must be < n_sites");
      }
      auto couplings = pst_couplings(n_sites, profile.j0);
      const std::size_t first = couplings.size() - profile.tail_count;
      for (std::size_t k = 0; k < profile.tail_count; ++k) {
        couplings[first + k] = profile.tail_overrides[k];
      }
      return ChainSpec(std::move(couplings), gamma);
    }
    case ProfileKind::kUniform:
      if (!(profile.j0 > 0.0)) throw InvalidInput("expand_profile: uniform j0 must be > 0");
      return ChainSpec(std::vector<double>(n_sites - 1, profile.j0), gamma);
    case ProfileKind::kExplicit:
      if (profile.couplings.size() != n_sites - 1) {
        throw InvalidInput("expand_profile: explicit profile needs n_sites - 1 couplings");
      }
      return ChainSpec(profile.couplings, gamma);
  }
  throw InvalidInput("expand_profile: unknown profile kind");
}

Eigen::MatrixXd build_xx_matrix(const ChainSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.n_sites());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const double j = spec.couplings()[static_cast<std::size_t>(i)];
    m(i, i + 1) = j;
    m(i + 1, i) = j;
  }
  return m;
}

Eigen::MatrixXcd build_effective_matrix(const ChainSpec& spec) {
  Eigen::MatrixXcd m = build_xx_matrix(spec).cast<std::complex<double>>();
  const auto last = m.rows() - 1;
  m(last, last) = {0.0, -0.5 * spec.gamma()};
  return m;
}

ChainSpec quench_decouple_first(const ChainSpec& spec) {
  auto couplings = spec.couplings();
  couplings.front() = 0.0;
  return ChainSpec(std::move(couplings), spec.gamma(), QuenchPolicy::kAllowFirstBondZero);
}

Eigen::MatrixXcd Tridiagonal::dense() const {
  const auto n = static_cast<Eigen::Index>(diag.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = diag[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    m(i, i + 1) = off[static_cast<std::size_t>(i)];
    m(i + 1, i) = off[static_cast<std::size_t>(i)];
  }
  return m;
}

Tridiagonal Tridiagonal::effective(const ChainSpec& spec) {
  Tridiagonal t;
  t.off = spec.couplings();
  t.diag.assign(spec.n_sites(), {0.0, 0.0});
  t.diag.back() = {0.0, -0.5 * spec.gamma()};
  return t;
}

Tridiagonal Tridiagonal::from_dense(const Eigen::MatrixXcd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw InvalidInput("Tridiagonal::from_dense: matrix must be square and non-empty");
  }
  const auto n = matrix.rows();
  Tridiagonal t;
  t.diag.resize(static_cast<std::size_t>(n));
  t.off.resize(static_cast<std::size_t>(n - 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(i - j) > 1 && matrix(i, j) != std::complex<double>{}) {
        throw InvalidInput("Tridiagonal::from_dense: matrix is not tridiagonal");
      }
    }
    t.diag[static_cast<std::size_t>(i)] = matrix(i, i);
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    const auto upper = matrix(i, i + 1);
    if (upper != matrix(i + 1, i) || upper.imag() != 0.0) {
      throw InvalidInput("Tridiagonal::from_dense: off-diagonal must be real and symmetric");
    }
    t.off[static_cast<std::size_t>(i)] = upper.real();
  }
  return t;
}

}  // namespace chainclock
