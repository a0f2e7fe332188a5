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

#ifndef B92_EVE_OBJECTIVE_HPP_
#define B92_EVE_OBJECTIVE_HPP_

#include <array>

#include "b92/channel.hpp"
#include "b92/linalg.hpp"
#include "b92/protocol.hpp"

namespace b92 {

/// Eigenvalue floor used while an optimizer probes the CP boundary; joint
/// states there can dip slightly below zero without being wrong.
inline constexpr double kBoundaryEigFloor = 1e-8;

/// Eve's ambiguity S(X|EP) about Alice's bit, together with the operator
/// blocks it is assembled from.
///
/// After Bob's measurement outcome is published (P = 0 conclusive, P = 1
/// discard, with Alice's bit set to 0 on discard), the X (x) E (x) P state is
/// block diagonal: the conclusive branch contributes one unnormalized
/// E-operator A_jk per (Alice bit j, conclusive outcome k) and the discard
/// branch one operator B. All traces together sum to one, and
///   S(X|EP) = St(A_00+A_01) + St(A_10+A_11) - St(sum of all A_jk),
/// where St is the unnormalized-block entropy -sum lambda log2 lambda; the
/// discard branch cancels exactly because X is deterministic there.
struct AmbiguityEvaluation {
  double value = 0;  ///< S(X|EP) in bits
  /// conclusive_blocks[j][k] = A_jk, 4x4 on E.
  std::array<std::array<ComplexMatrix, 2>, 2> conclusive_blocks;
  ComplexMatrix inconclusive_block;  ///< B, 4x4 on E
  double prob_conclusive = 0;
  double prob_inconclusive = 0;
};

/// Purification of a 4x4 density matrix into A (x) B (x) E with the
/// environment dimension fixed at 4 (rank-deficient states are zero-padded).
///
/// Uses the spectral decomposition rho = sum_i lambda_i |e_i><e_i| with
/// descending eigenvalues and the deterministic phase convention of
/// hermitian_eig, returning sum_i sqrt(lambda_i) |e_i>|i>_E. Eigenvalues in
/// [-eig_floor, 0) are clamped to zero; below that raises NotPositiveError.
ComplexVector purify(const ComplexMatrix& rho_ab, double eig_floor = kEigenvalueFloor);

/// Applies the post-selection map to a purification |Phi> of rho_AB and
/// evaluates S(X|EP).
///
/// Conclusive branch: A_jk = Tr_B[(<j|_A (x) sqrtF_k (x) I_E)|Phi><Phi|(...)]
/// for k in {0, 1}; since F_k = |v><v|/2 is rank one, sqrtF_k = |v><v|/sqrt2
/// and each A_jk is the rank-one operator w w^dag / 2 with
/// w = (<j|_A (x) <v_k|_B (x) I_E)|Phi>. Discard branch: B sums the same
/// contraction over the barred outcomes and both Alice indices.
AmbiguityEvaluation post_selected_state(const B92Context& ctx, const ComplexVector& phi,
                                        double eig_floor = kEigenvalueFloor);

/// S(X|EP) for the joint state induced by `ch`: joint_state -> purify ->
/// post_selected_state. Tolerates channels with Choi minimum eigenvalue down
/// to about -1e-8 so that penalty methods can evaluate near the CP boundary.
AmbiguityEvaluation eve_ambiguity(const B92Context& ctx, const BlochAffineChannel& ch,
                                  double eig_floor = kBoundaryEigFloor);

}  // namespace b92

#endif  // B92_EVE_OBJECTIVE_HPP_
