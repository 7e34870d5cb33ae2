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
#include <vector>

#include <Eigen/Dense>

namespace chainclock {

// Bond convention: J_i couples sites i and i+1, i = 1..N-1 (1-based, as in
// the physics literature). Storage is 0-based: couplings()[i - 1] == J_i.
// Times are in units of 1/gamma, energies in units of gamma.

enum class QuenchPolicy { kReject, kAllowFirstBondZero };

class ChainSpec {
 public:
  // Validates: at least one bond, all couplings finite and > 0 (J_1 may be 0
  // under kAllowFirstBondZero), gamma finite and >= 0.
  explicit ChainSpec(std::vector<double> couplings, double gamma = 1.0,
                     QuenchPolicy policy = QuenchPolicy::kReject);

  std::size_t n_sites() const { return couplings_.size() + 1; }
  const std::vector<double>& couplings() const { return couplings_; }
  double gamma() const { return gamma_; }
  // 1-based bond access.
  double bond(std::size_t i) const;
  bool quenched() const { return couplings_.front() == 0.0; }

  ChainSpec with_gamma(double gamma) const;

  friend bool operator==(const ChainSpec&, const ChainSpec&) = default;

 private:
  std::vector<double> couplings_;
  double gamma_;
};

enum class ProfileKind { kPst, kPstWithTailOverrides, kUniform, kExplicit };

struct CouplingProfile {
  ProfileKind kind = ProfileKind::kPst;
  double j0 = 1.0;
  // Declared number o of overridden tail bonds; must equal tail_overrides.size().
  std::size_t tail_count = 0;
  // Replaces J_{N-o}..J_{N-1}, in order.
  std::vector<double> tail_overrides;
  // Only for kExplicit.
  std::vector<double> couplings;
};

// J_i = j0 * sqrt(i (N - i)), i = 1..N-1.
std::vector<double> pst_couplings(std::size_t n_sites, double j0);

ChainSpec expand_profile(const CouplingProfile& profile, std::size_t n_sites,
                         double gamma = 1.0);

// Single-excitation hopping matrix: zero diagonal, M(i, i+1) = M(i+1, i) = J_i.
Eigen::MatrixXd build_xx_matrix(const ChainSpec& spec);

// Hopping matrix plus -i gamma / 2 on the last diagonal entry. Complex
// symmetric, not Hermitian.
Eigen::MatrixXcd build_effective_matrix(const ChainSpec& spec);

// Same spec with J_1 = 0: site 1 is decoupled from the rest of the chain.
ChainSpec quench_decouple_first(const ChainSpec& spec);

// Compact storage of a complex symmetric tridiagonal matrix.
struct Tridiagonal {
  std::vector<double> off;                 // size N-1
  std::vector<std::complex<double>> diag;  // size N

  std::size_t size() const { return diag.size(); }
  Eigen::MatrixXcd dense() const;
  // Sink rate recovered from the last diagonal entry (-i gamma / 2).
  double sink_rate() const { return -2.0 * diag.back().imag(); }

  static Tridiagonal effective(const ChainSpec& spec);
  // Throws InvalidInput unless the matrix is symmetric, tridiagonal, and has
  // real off-diagonal entries.
  static Tridiagonal from_dense(const Eigen::MatrixXcd& matrix);
};

}  // namespace chainclock
