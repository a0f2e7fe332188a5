// Copyright 2026 The b92-keyrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef B92_LINALG_HPP_
#define B92_LINALG_HPP_

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace b92 {

using Complex = std::complex<double>;

/// Dense complex matrix in row-major order. Carries every density matrix,
/// POVM element and post-selection block in the library. Everything stays
/// at 32x32 or below, so all algorithms here favor simplicity over
/// asymptotics.
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Thrown when a matrix that must be positive semidefinite has an eigenvalue
/// below the accepted roundoff floor.
class NotPositiveError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Entrywise tolerance for treating a matrix as Hermitian.
inline constexpr double kHermitianTol = 1e-12;

/// Eigenvalues in [-kEigenvalueFloor, 0) are clamped to zero; anything more
/// negative is an error. Post-selection blocks pick up tiny negative
/// eigenvalues from roundoff, which this floor absorbs.
inline constexpr double kEigenvalueFloor = 1e-9;

/// Pauli matrices indexed in the (z, x, y) order used throughout the channel
/// parameterization: pauli(0) = sigma_z, pauli(1) = sigma_x,
/// pauli(2) = sigma_y.
const ComplexMatrix& pauli(int zxy_index);

/// 2x2 identity.
const ComplexMatrix& identity2();

bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol);

/// True when m is Hermitian, has unit trace within trace_tol and smallest
/// eigenvalue >= -eig_floor.
bool is_density_matrix(const ComplexMatrix& m, double trace_tol = 1e-9,
                       double eig_floor = kEigenvalueFloor);

/// Kronecker product. Block (i, j) of the result equals a(i, j) * b.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Partial trace over the subsystems NOT listed in `keep`.
///
/// `dims` lists the subsystem dimensions in tensor order (their product must
/// equal the matrix dimension) and `keep` names the subsystems to retain, in
/// ascending order of their original position. An empty `keep` yields the
/// 1x1 matrix holding the full trace. The trace of the input is preserved.
ComplexMatrix partial_trace(const ComplexMatrix& m, const std::vector<int>& dims,
                            const std::vector<int>& keep);

struct HermitianEig {
  RealVector values;      ///< descending
  ComplexMatrix vectors;  ///< eigenvectors as columns, matching `values`
};

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back sorted descending. Each eigenvector is phase-fixed
/// by making its largest-magnitude component real and nonnegative, so
/// repeated runs produce identical purifications. Throws
/// std::invalid_argument for non-square or non-Hermitian input.
HermitianEig hermitian_eig(const ComplexMatrix& m);

/// Von Neumann entropy -sum_i lambda_i log2(lambda_i) in bits.
///
/// The trace does not have to be one: unnormalized post-selection blocks are
/// evaluated with the same formula. Eigenvalues in [-eig_floor, 0) count as
/// zero; anything below -eig_floor raises NotPositiveError.
double von_neumann_entropy(const ComplexMatrix& m,
                           double eig_floor = kEigenvalueFloor);

/// Conditional Shannon entropy H(row | column) of a 2x2 joint probability
/// table, in bits: H(joint) - H(column marginals). Entries must be
/// nonnegative and sum to one within 1e-9.
double shannon_conditional_entropy(const Eigen::Matrix2d& joint);

}  // namespace b92

#endif  // B92_LINALG_HPP_
