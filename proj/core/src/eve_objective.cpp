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

#include "b92/eve_objective.hpp"

#include <cmath>

namespace b92 {

namespace {

// |Phi> lives on A(2) (x) B(2) (x) E(4); component (a, b, e) sits at
// (a*2 + b)*4 + e.
constexpr int kEnvDim = 4;

// w = (<j|_A (x) <v|_B (x) I_E)|Phi>
ComplexVector contract_ab(const ComplexVector& phi, int j, const ComplexVector& v) {
  ComplexVector w = ComplexVector::Zero(kEnvDim);
  for (int b = 0; b < 2; ++b) {
    const Complex amp = std::conj(v(b));
    for (int e = 0; e < kEnvDim; ++e) {
      w(e) += amp * phi((j * 2 + b) * kEnvDim + e);
    }
  }
  return w;
}

}  // namespace

ComplexVector purify(const ComplexMatrix& rho_ab, double eig_floor) {
  if (rho_ab.rows() != 4 || rho_ab.cols() != 4) {
    throw std::invalid_argument("purify: expected a 4x4 state");
  }
  const HermitianEig eig = hermitian_eig(rho_ab);
  ComplexVector phi = ComplexVector::Zero(4 * kEnvDim);
  for (int i = 0; i < 4; ++i) {
    double lambda = eig.values(i);
    if (lambda < -eig_floor) {
      throw NotPositiveError("purify: state eigenvalue " + std::to_string(lambda) +
                             " below -" + std::to_string(eig_floor));
    }
    if (lambda <= 0) {
      continue;
    }
    const double w = std::sqrt(lambda);
    for (int ab = 0; ab < 4; ++ab) {
      phi(ab * kEnvDim + i) = w * eig.vectors(ab, i);
    }
  }
  return phi;
}

AmbiguityEvaluation post_selected_state(const B92Context& ctx, const ComplexVector& phi,
                                        double eig_floor) {
  if (phi.size() != 4 * kEnvDim) {
    throw std::invalid_argument("post_selected_state: purification must have 16 components");
  }
  const double norm_tol = (eig_floor <= kEigenvalueFloor) ? 1e-9 : 10.0 * eig_floor;
  if (std::abs(phi.squaredNorm() - 1.0) > norm_tol) {
    throw std::invalid_argument("post_selected_state: purification is not normalized");
  }

  AmbiguityEvaluation out;
  out.prob_conclusive = 0;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const ComplexVector w = contract_ab(phi, j, ctx.povm_vector[k]);
      out.conclusive_blocks[j][k] = (w * w.adjoint()) / 2.0;
      out.prob_conclusive += w.squaredNorm() / 2.0;
    }
  }

  out.inconclusive_block = ComplexMatrix::Zero(kEnvDim, kEnvDim);
  for (int kbar = 2; kbar < 4; ++kbar) {
    for (int a = 0; a < 2; ++a) {
      const ComplexVector m = contract_ab(phi, a, ctx.povm_vector[kbar]);
      out.inconclusive_block += (m * m.adjoint()) / 2.0;
    }
  }
  out.prob_inconclusive = out.inconclusive_block.trace().real();

  const double floor = std::max(eig_floor, kEigenvalueFloor);
  const ComplexMatrix row0 = out.conclusive_blocks[0][0] + out.conclusive_blocks[0][1];
  const ComplexMatrix row1 = out.conclusive_blocks[1][0] + out.conclusive_blocks[1][1];
  out.value = von_neumann_entropy(row0, floor) + von_neumann_entropy(row1, floor) -
              von_neumann_entropy(row0 + row1, floor);
  return out;
}

AmbiguityEvaluation eve_ambiguity(const B92Context& ctx, const BlochAffineChannel& ch,
                                  double eig_floor) {
  const ComplexMatrix rho = joint_state(ctx, ch);
  return post_selected_state(ctx, purify(rho, eig_floor), eig_floor);
}

}  // namespace b92
