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

#include "chainclock/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "chainclock/errors.hpp"

namespace chainclock {

namespace {

using cd = std::complex<double>;

bool pivot_in_right_half_plane(cd z) {
  return z.real() > 0.0 || (z.real() == 0.0 && z.imag() > 0.0);
}

double reflected_distance(const Eigen::VectorXcd& eps, Eigen::Index k, Eigen::Index j) {
  return std::abs(eps(j) + std::conj(eps(k)));
}

double spectral_scale(const Eigen::VectorXcd& eps) {
  return std::max(1.0, eps.size() ? eps.cwiseAbs().maxCoeff() : 0.0);
}

// Greedy matching of eps_k to the nearest unmatched -conj(eps_j).
std::vector<std::pair<std::size_t, std::size_t>> match_modes(const Eigen::VectorXcd& eps,
                                                             bool allow_self,
                                                             double* worst = nullptr) {
  const auto n = eps.size();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double worst_distance = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (used[static_cast<std::size_t>(k)]) continue;
    Eigen::Index best = -1;
    double best_distance = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)] || (j == k && !allow_self)) continue;
      const double d = reflected_distance(eps, k, j);
      if (d < best_distance) {
        best_distance = d;
        best = j;
      }
    }
    if (best < 0) {
      worst_distance = std::numeric_limits<double>::infinity();
      break;
    }
    used[static_cast<std::size_t>(k)] = true;
    used[static_cast<std::size_t>(best)] = true;
    worst_distance = std::max(worst_distance, best_distance);
    pairs.emplace_back(static_cast<std::size_t>(std::min(k, best)),
                       static_cast<std::size_t>(std::max(k, best)));
  }
  if (worst != nullptr) *worst = worst_distance;
  return pairs;
}

StateVector propagate_from_first(const Tridiagonal& matrix, double t) {
  const Propagator prop(matrix);
  auto psi = prop.site_state(1);
  prop.advance(psi, t);
  return psi;
}

}  // namespace

HermitianSpectrum decompose_hermitian(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw InvalidInput("decompose_hermitian: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw InvalidInput("decompose_hermitian: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("decompose_hermitian: eigensolver did not converge");
  }
  HermitianSpectrum out{solver.eigenvalues(), solver.eigenvectors()};
  // Deterministic sign: first nonzero component positive.
  for (Eigen::Index k = 0; k < out.eigenvectors.cols(); ++k) {
    auto col = out.eigenvectors.col(k);
    Eigen::Index pivot = 0;
    if (std::abs(col(0)) < 1e-12) col.cwiseAbs().maxCoeff(&pivot);
    if (col(pivot) < 0.0) col = -col;
  }
  return out;
}

EffectiveSpectrum decompose_effective(const Eigen::MatrixXcd& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw InvalidInput("decompose_effective: matrix must be square and non-empty");
  }
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale) {
    throw InvalidInput("decompose_effective: matrix is not complex symmetric");
  }
  EffectiveSpectrum out;
  out.source = Tridiagonal::from_dense(matrix);

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, true);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("decompose_effective: eigensolver did not converge");
  }
  const auto n = matrix.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto& raw_values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (raw_values(a).real() != raw_values(b).real()) {
      return raw_values(a).real() < raw_values(b).real();
    }
    return raw_values(a).imag() < raw_values(b).imag();
  });

  out.eigenvalues.resize(n);
  out.right_vectors.resize(n, n);
  const double matrix_norm = matrix.cwiseAbs().rowwise().sum().maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    const cd eps = raw_values(src);
    Eigen::VectorXcd r = solver.eigenvectors().col(src);
    const cd self_overlap = (r.transpose() * r)(0, 0);
    if (std::abs(self_overlap) < 1e-13 * r.squaredNorm()) {
      // Self-orthogonal vector: exceptional point, no biorthogonal scaling exists.
      out.degenerate = true;
      r /= r.norm();
    } else {
      r /= std::sqrt(self_overlap);
    }
    Eigen::Index pivot = 0;
    const double largest = r.cwiseAbs().maxCoeff(&pivot);
    if (std::abs(r(0)) > 1e-12 * largest) pivot = 0;
    if (!pivot_in_right_half_plane(r(pivot))) r = -r;

    const double residual = (matrix * r - eps * r).norm();
    if (residual > 1e-8 * std::max(1.0, matrix_norm) * std::max(1.0, r.norm())) {
      throw NumericalFailure("decompose_effective: eigenpair residual " +
                             std::to_string(residual) + " exceeds tolerance");
    }
    out.eigenvalues(k) = eps;
    out.right_vectors.col(k) = r;
  }

  const double gap_floor = kDegeneracyTolerance * out.eigenvalues.cwiseAbs().maxCoeff();
  for (Eigen::Index a = 0; a < n && !out.degenerate; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      if (std::abs(out.eigenvalues(a) - out.eigenvalues(b)) <= gap_floor) {
        out.degenerate = true;
        break;
      }
    }
  }
  return out;
}

EffectiveSpectrum decompose_effective(const ChainSpec& spec) {
  return decompose_effective(build_effective_matrix(spec));
}

double fidelity(const HermitianSpectrum& spectrum, double t) {
  if (!(t >= 0.0)) throw InvalidInput("fidelity: t must be >= 0");
  const auto& v = spectrum.eigenvectors;
  const auto last = v.rows() - 1;
  cd amplitude{0.0, 0.0};
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    amplitude += std::exp(cd{0.0, -spectrum.frequencies(k) * t}) * v(last, k) * v(0, k);
  }
  return std::clamp(std::norm(amplitude), 0.0, 1.0);
}

double fidelity_direct(const ChainSpec& spec, double t) {
  if (!(t >= 0.0)) throw InvalidInput("fidelity_direct: t must be >= 0");
  const auto psi = propagate_from_first(Tridiagonal::effective(spec.with_gamma(0.0)), t);
  return std::norm(psi.back());
}

SurvivalKernel::SurvivalKernel(const EffectiveSpectrum& spectrum)
    : eigenvalues_(spectrum.eigenvalues), start_(spectrum.right_vectors.row(0).transpose()) {
  gram_ = spectrum.right_vectors.adjoint() * spectrum.right_vectors;
  const auto n = eigenvalues_.size();
  weights_.resize(n, n);
  exponents_.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index kp = 0; kp < n; ++kp) {
      weights_(k, kp) = std::conj(start_(k)) * gram_(k, kp) * start_(kp);
      exponents_(k, kp) = cd{eigenvalues_(k).imag() + eigenvalues_(kp).imag(),
                             eigenvalues_(k).real() - eigenvalues_(kp).real()};
    }
  }
}

double SurvivalKernel::operator()(double t) const {
  if (!(t >= 0.0)) throw InvalidInput("survival: t must be >= 0");
  // exp(a_{kk'} t) = conj(exp(-i eps_k t)) * exp(-i eps_k' t), so the double sum
  // factorizes into z^dagger G z with z_k = r_{k,1} exp(-i eps_k t).
  Eigen::VectorXcd z(eigenvalues_.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    z(k) = start_(k) * std::exp(cd{0.0, -1.0} * eigenvalues_(k) * t);
  }
  const cd s = z.dot(gram_ * z);
  if (std::abs(s.imag()) > 1e-10) {
    throw NumericalFailure("survival: imaginary residue " + std::to_string(s.imag()));
  }
  return std::clamp(s.real(), 0.0, 1.0);
}

double survival(const EffectiveSpectrum& spectrum, double t) {
  if (!(t >= 0.0)) throw InvalidInput("survival: t must be >= 0");
  if (spectrum.degenerate) {
    const auto psi = propagate_from_first(spectrum.source, t);
    double s = 0.0;
    for (const auto& z : psi) s += std::norm(z);
    return std::clamp(s, 0.0, 1.0);
  }
  return SurvivalKernel(spectrum)(t);
}

double tick_pdf(const EffectiveSpectrum& spectrum, double t, double gamma) {
  if (!(t >= 0.0)) throw InvalidInput("tick_pdf: t must be >= 0");
  if (spectrum.degenerate) {
    return gamma * std::norm(propagate_from_first(spectrum.source, t).back());
  }
  const auto& r = spectrum.right_vectors;
  const auto last = r.rows() - 1;
  cd amplitude{0.0, 0.0};
  for (Eigen::Index k = 0; k < r.cols(); ++k) {
    amplitude += std::exp(cd{0.0, -1.0} * spectrum.eigenvalues(k) * t) * r(last, k) * r(0, k);
  }
  return gamma * std::norm(amplitude);
}

std::vector<std::pair<std::size_t, std::size_t>> pair_modes(const EffectiveSpectrum& spectrum,
                                                            double tolerance,
                                                            bool allow_self) {
  double worst = 0.0;
  auto pairs = match_modes(spectrum.eigenvalues, allow_self, &worst);
  std::size_t covered = 0;
  for (const auto& [k, partner] : pairs) covered += k == partner ? 1 : 2;
  if (covered != spectrum.size() ||
      worst > tolerance * spectral_scale(spectrum.eigenvalues)) {
    throw UnsupportedInput("pair_modes: eigenvalues do not pair under eps -> -conj(eps)");
  }
  return pairs;
}

PairedTickPdf::PairedTickPdf(const EffectiveSpectrum& spectrum) {
  if (spectrum.size() % 2 != 0) {
    throw UnsupportedInput("tick_pdf_paired: requires an even number of sites");
  }
  if (spectrum.degenerate) {
    throw UnsupportedInput("tick_pdf_paired: requires a non-degenerate spectrum");
  }
  const auto& r = spectrum.right_vectors;
  const auto last = r.rows() - 1;
  for (const auto& [k, partner] : pair_modes(spectrum, 1e-8, true)) {
    const auto idx = static_cast<Eigen::Index>(k);
    const cd a = r(last, idx) * r(0, idx);
    if (k == partner) {
      overdamped_.push_back({spectrum.eigenvalues(idx).imag(), -0.5 * a.imag()});
      continue;
    }
    pairs_.push_back({spectrum.eigenvalues(idx).imag(), spectrum.eigenvalues(idx).real(),
                      std::abs(a), std::arg(a)});
  }
}

double PairedTickPdf::operator()(double t, double gamma) const {
  if (!(t >= 0.0)) throw InvalidInput("tick_pdf_paired: t must be >= 0");
  double sum = 0.0;
  for (const auto& p : pairs_) {
    sum += std::exp(p.decay * t) * p.amplitude * std::sin(p.frequency * t - p.phase);
  }
  for (const auto& m : overdamped_) sum += std::exp(m.decay * t) * m.weight;
  return 4.0 * gamma * sum * sum;
}

double tick_pdf_paired(const EffectiveSpectrum& spectrum, double t, double gamma) {
  return PairedTickPdf(spectrum)(t, gamma);
}

double eigenvector_pairing_defect(const EffectiveSpectrum& spectrum) {
  const auto& r = spectrum.right_vectors;
  double worst = 0.0;
  for (const auto& [k, partner] : match_modes(spectrum.eigenvalues, true)) {
    const auto a = static_cast<Eigen::Index>(k);
    const auto b = static_cast<Eigen::Index>(partner);
    double best = std::numeric_limits<double>::infinity();
    for (const double s : {1.0, -1.0}) {
      double defect = 0.0;
      for (Eigen::Index j = 0; j < r.rows(); ++j) {
        const double parity = (j + 1) % 2 == 0 ? 1.0 : -1.0;  // (-1)^j, j 1-based
        defect = std::max(defect, std::abs(r(j, b) - s * parity * std::conj(r(j, a))));
      }
      best = std::min(best, defect);
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double biorthogonality_defect(const EffectiveSpectrum& spectrum) {
  const auto& r = spectrum.right_vectors;
  const Eigen::MatrixXcd overlap = r.transpose() * r;
  return (overlap - Eigen::MatrixXcd::Identity(r.cols(), r.cols())).cwiseAbs().maxCoeff();
}

double eigenvalue_pairing_defect(const EffectiveSpectrum& spectrum) {
  double worst = 0.0;
  match_modes(spectrum.eigenvalues, true, &worst);
  return worst;
}

}  // namespace chainclock
