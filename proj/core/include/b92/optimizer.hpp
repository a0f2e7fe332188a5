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

#ifndef B92_OPTIMIZER_HPP_
#define B92_OPTIMIZER_HPP_

#include <cstdint>
#include <vector>

#include "b92/channel.hpp"
#include "b92/eve_objective.hpp"
#include "b92/protocol.hpp"

namespace b92 {

/// Thrown when the two observed-statistics functionals fail to be linearly
/// independent over the chosen parameter space (pathological alpha only).
class DegenerateConstraintsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Channel parameter space the optimizer works in. The reduced space drops
/// the five parameters that can be zeroed without raising the minimum
/// (r(z,y), r(y,z), r(x,y), r(y,x), t(y)); the full space keeps all twelve
/// and exists to validate that claim numerically.
enum class ParameterSpace {
  kReduced7,
  kFull12,
};

struct OptimizationConfig {
  int restarts = 8;
  /// Iteration budget per restart, shared across the penalty stages.
  int max_iterations = 20000;
  /// Relative step for central finite-difference gradients.
  double gradient_step = 1e-5;
  /// Gradient-norm convergence threshold, in bits.
  double convergence_tol = 1e-8;
  /// Quadratic-penalty weights on CP violation, one descent per stage.
  std::vector<double> penalty_weights = {1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  std::uint64_t rng_seed = 1;
  ParameterSpace space = ParameterSpace::kReduced7;
};

struct OptimizationResult {
  double min_value = 0;  ///< best S(X|EP) found, bits
  BlochAffineChannel argmin;
  /// True when the best restart stopped at its tolerance (gradient norm or
  /// line-search floor) rather than exhausting the iteration budget, and the
  /// returned point meets the feasibility residuals below.
  bool converged = false;
  long iterations_used = 0;  ///< summed over restarts
  double min_choi_eig_at_opt = 0;
  double constraint_residual = 0;
  /// Best feasible objective seen up to the end of each penalty stage, for
  /// the restart that produced min_value. Non-increasing by construction.
  std::vector<double> stage_best_feasible;
};

/// One row of a key-rate sweep.
struct KeyRatePoint {
  double q = 0;
  double alpha = 0;
  double p_acc = 0;
  double c_match = 0;
  double c_err = 0;
  double h_xy = 0;      ///< H(X'|Y') in bits
  double s_min = 0;     ///< minimized S(X|EP) in bits
  double key_rate = 0;  ///< s_min / p_acc - h_xy, bits per sifted bit
  OptimizationResult diagnostics;
};

/// Affine parameterization of the channels consistent with the depolarizing
/// statistics at rate q: every point origin + sum_i u_i * basis_i reproduces
/// the observed match/err statistics exactly.
struct FeasibleParameterization {
  BlochAffineChannel origin;  ///< depolarizing(q)
  /// Orthonormal directions spanning the nullspace of the constraint map
  /// (5 in the reduced space, 10 in the full space), encoded as channel
  /// deltas added entrywise to the origin.
  std::vector<BlochAffineChannel> basis;
  ConstraintValues targets;  ///< statistics of the origin
  /// Jacobian of (match, err) with respect to the packed parameters.
  Eigen::MatrixXd constraint_matrix;
  ParameterSpace space = ParameterSpace::kReduced7;

  BlochAffineChannel channel_at(const Eigen::VectorXd& u) const;
};

/// Builds the feasible parameterization at depolarizing rate q.
///
/// The constraint functionals are affine in the channel parameters, so the
/// 2 x dim Jacobian is assembled by evaluating constraint_values on the zero
/// channel and on each unit-parameter channel; its nullspace (via SVD) spans
/// the feasible directions. Throws DegenerateConstraintsError if the
/// Jacobian rank is below 2, and std::invalid_argument for q outside [0, 1].
FeasibleParameterization feasible_parameterization(
    const B92Context& ctx, double q, ParameterSpace space = ParameterSpace::kReduced7);

/// Minimizes S(X|EP) over the CP channels consistent with the depolarizing
/// statistics at rate q.
///
/// Works in the nullspace coordinates of feasible_parameterization (so the
/// statistics constraints hold exactly throughout) and handles complete
/// positivity with an increasing quadratic penalty on the negative part of
/// the Choi minimum eigenvalue. Each penalty stage runs gradient descent
/// with central finite differences and a backtracking line search. Restart 0
/// starts from the depolarizing channel itself, so the result never exceeds
/// the objective there; the remaining restarts start from random feasible
/// points. Terminal points are pulled back along the segment to the origin
/// until CP holds, and min_value is evaluated there.
OptimizationResult minimize_ambiguity(const B92Context& ctx, double q,
                                      const OptimizationConfig& cfg);

struct FeasibleSample {
  std::vector<BlochAffineChannel> channels;
  long attempts = 0;
  /// Set when fewer than the requested n channels were accepted within the
  /// 100*n attempt budget (the feasible interior thins out as q -> 0).
  bool thin = false;
};

/// Rejection-samples n channels satisfying the depolarizing statistics and
/// the CP test. Nullspace coordinates are drawn uniformly from a box that
/// starts at half-width 1 and halves whenever acceptance drops below 5% over
/// a chunk of attempts, giving up after 100*n attempts total. Deterministic
/// for a fixed seed.
FeasibleSample sample_feasible(const B92Context& ctx, double q, int n, std::uint64_t seed);

/// Full key-rate evaluation at depolarizing rate q:
/// key_rate = min S(X|EP) / p_acc - H(X'|Y'), with the observed statistics
/// taken on the depolarizing channel itself (they are constrained equal for
/// every feasible channel).
KeyRatePoint key_rate(const B92Context& ctx, double q, const OptimizationConfig& cfg);

}  // namespace b92

#endif  // B92_OPTIMIZER_HPP_
