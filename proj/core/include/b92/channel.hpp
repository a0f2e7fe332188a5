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

#ifndef B92_CHANNEL_HPP_
#define B92_CHANNEL_HPP_

#include <Eigen/Dense>

#include "b92/linalg.hpp"

namespace b92 {

/// A qubit channel written as an affine map b -> r*b + t on Bloch vectors.
///
/// This family is exactly the trace-preserving, Hermiticity-preserving linear
/// maps on qubit operators, so trace preservation never needs an explicit
/// constraint. Rows and columns of `r` (and the entries of `t`) are ordered
/// (z, x, y) — NOT the conventional (x, y, z) — matching the Pauli indexing
/// of pauli(). apply_channel() is the single point where Bloch vectors are
/// extracted and reassembled, so the ordering cannot silently flip elsewhere.
struct BlochAffineChannel {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();  ///< Bloch matrix, (z,x,y) indexed
  Eigen::Vector3d t = Eigen::Vector3d::Zero();      ///< Bloch shift, (z,x,y) indexed

  /// Set when r(z,y) = r(y,z) = r(x,y) = r(y,x) = t(y) = 0 is known to hold,
  /// i.e. the channel lives in the 7-parameter reduced family that attains
  /// the ambiguity minimum.
  bool symmetry_reduced = false;
};

/// Applies the channel to a qubit density matrix: extracts the Bloch vector
/// b = (Tr[rho sigma_z], Tr[rho sigma_x], Tr[rho sigma_y]), maps it through
/// r*b + t and rebuilds (I + w.sigma)/2. The output trace is exactly one by
/// construction. Throws std::invalid_argument if rho is not a 2x2 density
/// matrix.
ComplexMatrix apply_channel(const BlochAffineChannel& ch, const ComplexMatrix& rho);

/// The unique linear extension of apply_channel to arbitrary (possibly
/// non-Hermitian) 2x2 inputs: the map acts on the complex Pauli expansion
/// coefficients, with the affine shift t attached to the identity
/// coefficient. Needed to push a channel through one factor of an entangled
/// operator block |i><j|.
ComplexMatrix apply_linear(const BlochAffineChannel& ch, const ComplexMatrix& m);

/// Choi matrix sum_{ij} E_ij (x) apply_linear(ch, E_ij) with E_ij = |i><j|
/// and the left factor the input copy. Hermitian with trace 2; positive
/// semidefinite exactly when the channel is completely positive.
ComplexMatrix choi_matrix(const BlochAffineChannel& ch);

/// Smallest eigenvalue of choi_matrix(ch). The channel counts as completely
/// positive when this is >= -1e-10; the slack keeps boundary channels such
/// as the identity from being rejected by roundoff.
double min_choi_eigenvalue(const BlochAffineChannel& ch);

/// CP test tolerance on the Choi minimum eigenvalue.
inline constexpr double kChoiPsdTol = 1e-10;

/// Depolarizing channel: r = (1 - 4q/3) * I, t = 0.
///
/// Note the convention: rate q contracts the Bloch sphere by 1 - 4q/3 (the
/// channel mixes in the maximally mixed state with weight 4q/3), not by
/// 1 - q. Throws std::invalid_argument unless 0 <= q <= 1.
BlochAffineChannel depolarizing(double q);

/// Returns a copy with r(z,y), r(y,z), r(x,y), r(y,x) and t(y) zeroed and the
/// symmetry_reduced flag set. Idempotent; never increases the ambiguity
/// objective on channels consistent with the same protocol statistics.
BlochAffineChannel symmetrize(const BlochAffineChannel& ch);

/// Entrywise affine combination (1 - weight_b) * a + weight_b * b.
BlochAffineChannel lerp(const BlochAffineChannel& a, const BlochAffineChannel& b,
                        double weight_b);

}  // namespace b92

#endif  // B92_CHANNEL_HPP_
