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

#ifndef B92_PROTOCOL_HPP_
#define B92_PROTOCOL_HPP_

#include <array>

#include "b92/channel.hpp"
#include "b92/linalg.hpp"

namespace b92 {

/// Thrown when the acceptance probability is too small for conditioning on a
/// conclusive outcome to make sense.
class DegenerateSiftingError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Signal states, measurement and source state of the single-photon B92
/// protocol at a fixed amplitude alpha.
///
/// Alice sends |phi_j> = beta|0> + (-1)^j alpha|1> for bit j, with
/// beta = sqrt(1 - alpha^2) and 0 < alpha < 1/sqrt(2). |phibar_j> is the
/// state orthogonal to |phi_j>. Bob measures the four-outcome POVM
///   F_0 = |phibar_1><phibar_1|/2,   F_1 = |phibar_0><phibar_0|/2,
///   F_0bar = |phi_1><phi_1|/2,      F_1bar = |phi_0><phi_0|/2;
/// outcomes F_0, F_1 are conclusive (they pin down Alice's bit when the
/// channel is noiseless), the barred outcomes are discarded. The entangled
/// source description is |Psi> = (|0>|phi_0> + |1>|phi_1|)/sqrt(2).
///
/// Immutable after make_context(); safe to share across threads.
struct B92Context {
  double alpha = 0;
  double beta = 0;
  std::array<ComplexVector, 2> phi;
  std::array<ComplexVector, 2> phibar;
  /// F_0, F_1, F_0bar, F_1bar.
  std::array<ComplexMatrix, 4> povm;
  /// povm[k] = povm_vector[k] * povm_vector[k]^dag / 2 (all four are rank one).
  std::array<ComplexVector, 4> povm_vector;
  /// |Psi> on A (x) B, A-major ordering.
  ComplexVector psi;
};

/// Builds a context and verifies the structural identities (normalization,
/// orthogonality, POVM completeness) to 1e-12. Throws std::invalid_argument
/// unless 0 < alpha < 1/sqrt(2).
B92Context make_context(double alpha);

/// rho_AB = (I (x) channel)|Psi><Psi|, assembled block by block through the
/// channel's linear extension. Trace one and Hermitian for any parameter
/// values; positive semidefinite exactly when the channel is CP.
ComplexMatrix joint_state(const B92Context& ctx, const BlochAffineChannel& ch);

/// Probability of a conclusive outcome: Tr[rho_ab (I (x) (F_0 + F_1))].
double acceptance_probability(const B92Context& ctx, const ComplexMatrix& rho_ab);

/// The two observed statistics that constrain the channel estimate.
struct ConstraintValues {
  double match;  ///< Tr[(|0><0| (x) F_0 + |1><1| (x) F_1) rho_ab]
  double err;    ///< Tr[(|1><1| (x) F_0 + |0><0| (x) F_1) rho_ab]
};

/// match + err always equals acceptance_probability (operator identity).
ConstraintValues constraint_values(const B92Context& ctx, const ComplexMatrix& rho_ab);

/// Joint distribution of (Alice's bit, Bob's conclusive outcome) conditioned
/// on a conclusive outcome: p(j, k) = Tr[(|j><j| (x) F_k) rho_ab] / p_acc.
/// Throws DegenerateSiftingError when p_acc <= 1e-12.
Eigen::Matrix2d sifted_distribution(const B92Context& ctx, const ComplexMatrix& rho_ab);

/// Information-reconciliation cost H(X'|Y') of the sifted distribution, bits.
double reconciliation_cost(const B92Context& ctx, const ComplexMatrix& rho_ab);

}  // namespace b92

#endif  // B92_PROTOCOL_HPP_
