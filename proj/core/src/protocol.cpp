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

#include "b92/protocol.hpp"

#include <cmath>

namespace b92 {

namespace {

constexpr double kInvSqrt2Bound = 0.70710678118654752440;

void check_rho_ab(const ComplexMatrix& rho_ab) {
  // Hermiticity and unit trace only: the constraint functionals are evaluated
  // on non-CP parameter directions whose joint states are not PSD.
  if (rho_ab.rows() != 4 || rho_ab.cols() != 4) {
    throw std::invalid_argument("expected a 4x4 joint state");
  }
  if (!is_hermitian(rho_ab)) {
    throw std::invalid_argument("joint state must be Hermitian");
  }
  if (std::abs(rho_ab.trace().real() - 1.0) > 1e-9) {
    throw std::invalid_argument("joint state must have unit trace");
  }
}

double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a * b).trace().real();
}

// Tr[(|j><j| (x) F_k) rho_ab]: project Alice on j and hit Bob's block with F_k.
double outcome_weight(const B92Context& ctx, const ComplexMatrix& rho_ab, int j, int k) {
  const ComplexMatrix block = rho_ab.block(2 * j, 2 * j, 2, 2);
  return real_trace_product(ctx.povm[k], block);
}

}  // namespace

B92Context make_context(double alpha) {
  if (!(alpha > 0.0 && alpha < kInvSqrt2Bound)) {
    throw std::invalid_argument("make_context: alpha must lie in (0, 1/sqrt(2))");
  }
  B92Context ctx;
  ctx.alpha = alpha;
  ctx.beta = std::sqrt(1.0 - alpha * alpha);

  for (int j = 0; j < 2; ++j) {
    const double sign = (j == 0) ? 1.0 : -1.0;
    ctx.phi[j] = ComplexVector(2);
    ctx.phi[j] << ctx.beta, sign * alpha;
    ctx.phibar[j] = ComplexVector(2);
    ctx.phibar[j] << alpha, -sign * ctx.beta;
  }

  ctx.povm_vector = {ctx.phibar[1], ctx.phibar[0], ctx.phi[1], ctx.phi[0]};
  for (int k = 0; k < 4; ++k) {
    ctx.povm[k] = ctx.povm_vector[k] * ctx.povm_vector[k].adjoint() / 2.0;
  }

  ctx.psi = ComplexVector(4);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  ctx.psi.segment(0, 2) = inv_sqrt2 * ctx.phi[0];
  ctx.psi.segment(2, 2) = inv_sqrt2 * ctx.phi[1];

  // Structural identities; failures here would mean a construction bug.
  for (int j = 0; j < 2; ++j) {
    if (std::abs(ctx.phi[j].squaredNorm() - 1.0) > 1e-12 ||
        std::abs(ctx.phibar[j].squaredNorm() - 1.0) > 1e-12 ||
        std::abs(ctx.phibar[j].dot(ctx.phi[j])) > 1e-12) {
      throw std::runtime_error("make_context: signal-state identities violated");
    }
  }
  ComplexMatrix povm_sum = ComplexMatrix::Zero(2, 2);
  for (const auto& f : ctx.povm) {
    povm_sum += f;
  }
  if ((povm_sum - identity2()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::runtime_error("make_context: POVM does not sum to identity");
  }
  return ctx;
}

ComplexMatrix joint_state(const B92Context& ctx, const BlochAffineChannel& ch) {
  ComplexMatrix rho = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const ComplexMatrix signal_block = ctx.phi[i] * ctx.phi[j].adjoint();
      rho.block(2 * i, 2 * j, 2, 2) = apply_linear(ch, signal_block) / 2.0;
    }
  }
  return rho;
}

double acceptance_probability(const B92Context& ctx, const ComplexMatrix& rho_ab) {
  check_rho_ab(rho_ab);
  const ComplexMatrix conclusive = ctx.povm[0] + ctx.povm[1];
  return real_trace_product(kron(identity2(), conclusive), rho_ab);
}

ConstraintValues constraint_values(const B92Context& ctx, const ComplexMatrix& rho_ab) {
  check_rho_ab(rho_ab);
  ConstraintValues out;
  out.match = outcome_weight(ctx, rho_ab, 0, 0) + outcome_weight(ctx, rho_ab, 1, 1);
  out.err = outcome_weight(ctx, rho_ab, 1, 0) + outcome_weight(ctx, rho_ab, 0, 1);
  return out;
}

Eigen::Matrix2d sifted_distribution(const B92Context& ctx, const ComplexMatrix& rho_ab) {
  check_rho_ab(rho_ab);
  const double p_acc = acceptance_probability(ctx, rho_ab);
  if (p_acc <= 1e-12) {
    throw DegenerateSiftingError("sifted_distribution: acceptance probability is zero");
  }
  Eigen::Matrix2d table;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      double p = outcome_weight(ctx, rho_ab, j, k) / p_acc;
      if (p < 0) {
        if (p < -1e-12) {
          throw std::invalid_argument("sifted_distribution: negative outcome probability");
        }
        p = 0;  // roundoff from an exactly-zero statistic
      }
      table(j, k) = p;
    }
  }
  return table;
}

double reconciliation_cost(const B92Context& ctx, const ComplexMatrix& rho_ab) {
  return shannon_conditional_entropy(sifted_distribution(ctx, rho_ab));
}

}  // namespace b92
