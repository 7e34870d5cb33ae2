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
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "chainclock/chain_model.hpp"
#include "chainclock/propagation.hpp"

namespace chainclock {

struct HermitianSpectrum {
  Eigen::VectorXd frequencies;   // ascending
  Eigen::MatrixXd eigenvectors;  // column k is v_k, orthonormal
};

// Relative eigenvalue gap below which a spectrum is flagged degenerate.
inline constexpr double kDegeneracyTolerance = 1e-8;

// Eigenpairs of a complex symmetric matrix H = H^T with left vectors equal to
// the transposed right vectors. Each column r_k is scaled so that
// sum_j r_{k,j}^2 = 1 (no conjugation), with the square-root branch fixed by
// requiring Arg r_{k,1} in (-pi/2, pi/2] (largest component if r_{k,1} ~ 0).
struct EffectiveSpectrum {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd right_vectors;
  bool degenerate = false;
  // The decomposed matrix; time-domain fallbacks propagate with it.
  Tridiagonal source;

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  // Sink rate read off the source matrix.
  double gamma() const { return source.sink_rate(); }
};

// Throws InvalidInput for non-symmetric input.
HermitianSpectrum decompose_hermitian(const Eigen::MatrixXd& matrix);

// Throws InvalidInput for non-symmetric or non-tridiagonal input and
// NumericalFailure when the eigensolver fails or a residual check fails.
// Degeneracy is reported through the flag, never thrown.
EffectiveSpectrum decompose_effective(const Eigen::MatrixXcd& matrix);
EffectiveSpectrum decompose_effective(const ChainSpec& spec);

// End-to-end transfer fidelity |<N| exp(-i H t) |1>|^2 from the spectrum.
double fidelity(const HermitianSpectrum& spectrum, double t);
// Same quantity from direct time propagation of the closed chain.
double fidelity_direct(const ChainSpec& spec, double t);

// Precomputed double-sum representation of the survival probability
//   S(t) = sum_{k,k'} <1|l_k><r_k|r_k'><l_k'|1> exp(a_{kk'} t),
//   a_{kk'} = (eps^I_k + eps^I_k') + i (eps^R_k - eps^R_k'),
// with <l_k|1> = r_{k,1} and the conjugating overlap <r_k|r_k'>.
class SurvivalKernel {
 public:
  explicit SurvivalKernel(const EffectiveSpectrum& spectrum);

  // S(t); throws NumericalFailure if the imaginary residue exceeds 1e-10.
  double operator()(double t) const;

  const Eigen::MatrixXcd& weights() const { return weights_; }
  const Eigen::MatrixXcd& exponents() const { return exponents_; }

 private:
  Eigen::VectorXcd eigenvalues_;
  Eigen::VectorXcd start_;  // r_{k,1}
  Eigen::MatrixXcd gram_;   // <r_k|r_k'>
  Eigen::MatrixXcd weights_;
  Eigen::MatrixXcd exponents_;
};

// S(t) from |1>. Degenerate spectra fall back to time propagation.
double survival(const EffectiveSpectrum& spectrum, double t);

// gamma |sum_k exp(-i eps_k t) r_{k,N} r_{k,1}|^2. Degenerate spectra fall
// back to time propagation.
double tick_pdf(const EffectiveSpectrum& spectrum, double t, double gamma);

// Matches each eigenvalue with its partner under eps -> -conj(eps). Returns
// index pairs (k, partner) with k <= partner. Purely imaginary eigenvalues are
// their own partner and appear as (k, k) when allow_self is set. Throws
// UnsupportedInput if some mode has no partner within tolerance.
std::vector<std::pair<std::size_t, std::size_t>> pair_modes(const EffectiveSpectrum& spectrum,
                                                            double tolerance = 1e-8,
                                                            bool allow_self = false);

// Symmetry-reduced tick PDF over N/2 mode pairs:
//   4 gamma |sum_k e^{eps^I_k t} |r_{k,N} r_{k,1}| sin(eps^R_k t - Arg[r_{k,N} r_{k,1}])|^2.
// Overdamped modes with purely imaginary eps are self-paired; each adds the
// real term -e^{eps^I t} Im[r_{k,N} r_{k,1}] / 2 inside the bracket.
// Throws UnsupportedInput for odd N, degenerate spectra, or failed pairing.
class PairedTickPdf {
 public:
  explicit PairedTickPdf(const EffectiveSpectrum& spectrum);
  double operator()(double t, double gamma) const;

 private:
  struct Pair {
    double decay;      // eps^I
    double frequency;  // eps^R
    double amplitude;  // |r_N r_1|
    double phase;      // Arg[r_N r_1]
  };
  struct Overdamped {
    double decay;
    double weight;  // -Im[r_N r_1] / 2
  };
  std::vector<Pair> pairs_;
  std::vector<Overdamped> overdamped_;
};

double tick_pdf_paired(const EffectiveSpectrum& spectrum, double t, double gamma);

// Largest deviation from the eigenvector pairing relation
// r_{j,-k} = s_k (-1)^j conj(r_{j,k}), minimized over s_k = +-1 per pair.
double eigenvector_pairing_defect(const EffectiveSpectrum& spectrum);

// Largest |sum_j r_{k,j} r_{k',j} - delta_{kk'}|.
double biorthogonality_defect(const EffectiveSpectrum& spectrum);

// Smallest distance between each eigenvalue and the reflected set {-conj(eps)},
// maximized over the spectrum (multiset matching by greedy assignment).
double eigenvalue_pairing_defect(const EffectiveSpectrum& spectrum);

}  // namespace chainclock
