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

#include "b92/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

namespace b92 {

namespace {

int space_dim(ParameterSpace space) {
  return space == ParameterSpace::kReduced7 ? 7 : 12;
}

// Packed coordinate orders. Reduced: (r_zz, r_zx, r_xz, r_xx, r_yy, t_z, t_x).
// Full: r row-major over (z,x,y), then (t_z, t_x, t_y).
Eigen::VectorXd pack(const BlochAffineChannel& ch, ParameterSpace space) {
  if (space == ParameterSpace::kReduced7) {
    Eigen::VectorXd p(7);
    p << ch.r(0, 0), ch.r(0, 1), ch.r(1, 0), ch.r(1, 1), ch.r(2, 2), ch.t(0), ch.t(1);
    return p;
  }
  Eigen::VectorXd p(12);
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      p(3 * row + col) = ch.r(row, col);
    }
  }
  p.tail(3) = ch.t;
  return p;
}

BlochAffineChannel unpack(const Eigen::VectorXd& p, ParameterSpace space) {
  BlochAffineChannel ch;
  ch.r.setZero();
  ch.t.setZero();
  if (space == ParameterSpace::kReduced7) {
    ch.r(0, 0) = p(0);
    ch.r(0, 1) = p(1);
    ch.r(1, 0) = p(2);
    ch.r(1, 1) = p(3);
    ch.r(2, 2) = p(4);
    ch.t(0) = p(5);
    ch.t(1) = p(6);
    ch.symmetry_reduced = true;
    return ch;
  }
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) {
      ch.r(row, col) = p(3 * row + col);
    }
  }
  ch.t = p.tail(3);
  return ch;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, restart, q). Hashing the bits of q rather
// than a sweep index keeps results identical for the same (alpha, q, seed)
// regardless of which CLI mode evaluated them.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t restart, double q) {
  const auto q_bits = std::bit_cast<std::uint64_t>(q);
  return splitmix64(splitmix64(seed) ^ splitmix64(q_bits) ^
                    (restart + 1) * 0x9e3779b97f4a7c15ULL);
}

// Uniform in [-1, 1) from raw bits; identical output on every platform.
double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

struct PointEval {
  double value = 0;
  double choi_min = 0;
  double cp_violation_sq = 0;
};

class PenalizedObjective {
 public:
  PenalizedObjective(const B92Context& ctx, const FeasibleParameterization& param)
      : ctx_(ctx), param_(param) {}

  double choi_min_at(const Eigen::VectorXd& u) const {
    return min_choi_eigenvalue(param_.channel_at(u));
  }

  PointEval eval(const Eigen::VectorXd& u) const {
    const BlochAffineChannel ch = param_.channel_at(u);
    PointEval pe;
    pe.choi_min = min_choi_eigenvalue(ch);
    const double violation = std::max(0.0, -pe.choi_min - kChoiPsdTol);
    pe.cp_violation_sq = violation * violation;
    // Joint-state negativity scales with the Choi negativity, so widen the
    // clamping floor in step when a line search probes outside the CP set.
    const double floor = std::max(kBoundaryEigFloor, 8.0 * std::max(0.0, -pe.choi_min));
    pe.value = eve_ambiguity(ctx_, ch, floor).value;
    return pe;
  }

  static double penalized(const PointEval& pe, double mu) {
    return pe.value + mu * pe.cp_violation_sq;
  }

 private:
  const B92Context& ctx_;
  const FeasibleParameterization& param_;
};

struct FeasibleIterate {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd u;
};

struct StageOutcome {
  int iterations = 0;
  bool hit_budget = false;
};

// One penalty stage: gradient descent with central finite differences and a
// backtracking Armijo line search. The trial step starts from the
// Barzilai-Borwein estimate when it is positive, which keeps the descent
// usable on the badly conditioned late penalty stages. Terminates at the
// gradient tolerance, when two consecutive line searches cannot find any
// decrease, or when the objective stops improving beyond the
// finite-difference noise floor.
StageOutcome descend_stage(const PenalizedObjective& obj, double mu, int budget,
                           const OptimizationConfig& cfg, Eigen::VectorXd& u, PointEval& pe,
                           FeasibleIterate& best_feasible) {
  const int d = static_cast<int>(u.size());
  double f = PenalizedObjective::penalized(pe, mu);
  double last_step = 1.0;
  Eigen::VectorXd prev_u, prev_g;
  bool have_prev = false;
  int stalled = 0;
  // Central differences with relative step h bound the certifiable objective
  // progress from below; once improvements stay under this floor for a run
  // of iterations the stage has converged to numerical precision.
  const double progress_floor = 1e-13 * std::max(1.0, std::abs(f));
  int no_progress_streak = 0;

  for (int it = 1; it <= budget; ++it) {
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) {
      const double h = cfg.gradient_step * (1.0 + std::abs(u(i)));
      Eigen::VectorXd up = u;
      Eigen::VectorXd um = u;
      up(i) += h;
      um(i) -= h;
      g(i) = (PenalizedObjective::penalized(obj.eval(up), mu) -
              PenalizedObjective::penalized(obj.eval(um), mu)) /
             (2.0 * h);
    }
    const double g_norm = g.norm();
    if (g_norm <= cfg.convergence_tol) {
      return {it, false};
    }

    double step = 2.0 * last_step;
    if (have_prev) {
      const Eigen::VectorXd du = u - prev_u;
      const Eigen::VectorXd dg = g - prev_g;
      const double curvature = du.dot(dg);
      if (curvature > 0) {
        step = std::clamp(du.squaredNorm() / curvature, 1e-12, 1e3);
      }
    }
    prev_u = u;
    prev_g = g;
    have_prev = true;

    bool accepted = false;
    double improvement = 0;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      const Eigen::VectorXd trial = u - step * g;
      const PointEval trial_pe = obj.eval(trial);
      const double trial_f = PenalizedObjective::penalized(trial_pe, mu);
      if (trial_f <= f - 1e-4 * step * g_norm * g_norm) {
        improvement = f - trial_f;
        u = trial;
        pe = trial_pe;
        f = trial_f;
        if (pe.choi_min >= -kChoiPsdTol && pe.value < best_feasible.value) {
          best_feasible.value = pe.value;
          best_feasible.u = u;
        }
        last_step = step;
        accepted = true;
        break;
      }
      step /= 2.0;
    }
    if (accepted) {
      stalled = 0;
      no_progress_streak = (improvement < progress_floor) ? no_progress_streak + 1 : 0;
      if (no_progress_streak >= 25) {
        return {it, false};
      }
    } else {
      if (++stalled >= 2) {
        return {it, false};
      }
      last_step = 1.0;  // one retry from a fresh step scale
    }
  }
  return {budget, true};
}

// Shrinks u toward the origin (always feasible) until the CP test holds with
// margin. The Choi minimum eigenvalue is concave along the segment, so
// bisection on the shrink factor is valid.
Eigen::VectorXd pull_back_to_cp(const PenalizedObjective& obj, const Eigen::VectorXd& u) {
  if (obj.choi_min_at(u) >= -kChoiPsdTol) {
    return u;
  }
  double lo = 0.0;  // at u: infeasible
  double hi = 1.0;  // at origin: feasible
  for (int i = 0; i < 60; ++i) {
    const double mid = (lo + hi) / 2.0;
    if (obj.choi_min_at((1.0 - mid) * u) >= -kChoiPsdTol / 10.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return (1.0 - hi) * u;
}

Eigen::VectorXd sample_feasible_start(const PenalizedObjective& obj, int d,
                                      std::mt19937_64& rng) {
  double half_width = 1.0;
  while (half_width >= 1e-8) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      Eigen::VectorXd u(d);
      for (int i = 0; i < d; ++i) {
        u(i) = half_width * uniform_pm1(rng);
      }
      if (obj.choi_min_at(u) >= -kChoiPsdTol) {
        return u;
      }
    }
    half_width /= 2.0;  // the feasible interior thins out as q -> 0
  }
  return Eigen::VectorXd::Zero(d);
}

void check_config(const OptimizationConfig& cfg) {
  if (cfg.restarts < 1 || cfg.max_iterations < 1 || cfg.gradient_step <= 0 ||
      cfg.convergence_tol <= 0) {
    throw std::invalid_argument("optimizer config fields must be positive");
  }
  if (cfg.penalty_weights.empty()) {
    throw std::invalid_argument("penalty schedule must be nonempty");
  }
  double prev = 0;
  for (double w : cfg.penalty_weights) {
    if (w <= prev) {
      throw std::invalid_argument("penalty schedule must be positive and strictly increasing");
    }
    prev = w;
  }
}

}  // namespace

BlochAffineChannel FeasibleParameterization::channel_at(const Eigen::VectorXd& u) const {
  if (u.size() != static_cast<Eigen::Index>(basis.size())) {
    throw std::invalid_argument("channel_at: coordinate count does not match basis");
  }
  BlochAffineChannel ch = origin;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    ch.r += u(i) * basis[i].r;
    ch.t += u(i) * basis[i].t;
  }
  ch.symmetry_reduced = space == ParameterSpace::kReduced7;
  return ch;
}

FeasibleParameterization feasible_parameterization(const B92Context& ctx, double q,
                                                   ParameterSpace space) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("feasible_parameterization: q must lie in [0, 1]");
  }
  const int dim = space_dim(space);

  const auto constraints_at = [&](const Eigen::VectorXd& p) {
    const ConstraintValues cv = constraint_values(ctx, joint_state(ctx, unpack(p, space)));
    return Eigen::Vector2d(cv.match, cv.err);
  };

  // The constraint functionals are affine in the packed parameters, so the
  // zero channel plus the unit-parameter channels determine them completely.
  const Eigen::Vector2d c0 = constraints_at(Eigen::VectorXd::Zero(dim));
  Eigen::MatrixXd jac(2, dim);
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(dim);
    unit(i) = 1.0;
    jac.col(i) = constraints_at(unit) - c0;
  }

  FeasibleParameterization out;
  out.space = space;
  out.origin = depolarizing(q);
  out.constraint_matrix = jac;
  const ConstraintValues origin_cv = constraint_values(ctx, joint_state(ctx, out.origin));
  out.targets = origin_cv;

  const Eigen::Vector2d modeled = c0 + jac * pack(out.origin, space);
  if (std::abs(modeled(0) - origin_cv.match) > 1e-10 ||
      std::abs(modeled(1) - origin_cv.err) > 1e-10) {
    throw std::runtime_error("feasible_parameterization: affine constraint model mismatch");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeFullV);
  const double sv_max = svd.singularValues()(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > std::max(1e-12, 1e-10 * sv_max)) {
      ++rank;
    }
  }
  if (rank < 2) {
    throw DegenerateConstraintsError(
        "feasible_parameterization: constraint functionals are rank deficient");
  }

  out.basis.reserve(dim - 2);
  for (int i = 2; i < dim; ++i) {
    BlochAffineChannel dir = unpack(svd.matrixV().col(i), space);
    dir.symmetry_reduced = space == ParameterSpace::kReduced7;
    out.basis.push_back(dir);
  }
  return out;
}

OptimizationResult minimize_ambiguity(const B92Context& ctx, double q,
                                      const OptimizationConfig& cfg) {
  check_config(cfg);
  const FeasibleParameterization param = feasible_parameterization(ctx, q, cfg.space);
  const PenalizedObjective obj(ctx, param);
  const int d = static_cast<int>(param.basis.size());
  const int stage_budget =
      std::max(100, cfg.max_iterations / static_cast<int>(cfg.penalty_weights.size()));

  struct RestartOutcome {
    double value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd u;
    bool clean = false;
    std::vector<double> stage_trace;
  };

  RestartOutcome best;
  long total_iterations = 0;

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    std::mt19937_64 rng(stream_seed(cfg.rng_seed, restart, q));
    Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
    if (restart > 0) {
      u = sample_feasible_start(obj, d, rng);
    }
    PointEval pe = obj.eval(u);

    FeasibleIterate best_feasible;
    if (pe.choi_min >= -kChoiPsdTol) {
      best_feasible.value = pe.value;
      best_feasible.u = u;
    }

    long used = 0;
    bool clean = true;
    std::vector<double> trace;
    trace.reserve(cfg.penalty_weights.size());
    for (double mu : cfg.penalty_weights) {
      const int budget = static_cast<int>(
          std::min<long>(stage_budget, static_cast<long>(cfg.max_iterations) - used));
      if (budget <= 0) {
        clean = false;
        break;
      }
      const StageOutcome stage = descend_stage(obj, mu, budget, cfg, u, pe, best_feasible);
      used += stage.iterations;
      clean = clean && !stage.hit_budget;
      trace.push_back(best_feasible.value);
    }
    total_iterations += used;

    // Candidate points: the terminal iterate pulled back into the CP set, and
    // the best feasible iterate seen on the way.
    const Eigen::VectorXd u_final = pull_back_to_cp(obj, u);
    double value = obj.eval(u_final).value;
    Eigen::VectorXd u_best = u_final;
    if (best_feasible.value < value) {
      value = best_feasible.value;
      u_best = best_feasible.u;
    }

    if (value < best.value) {
      best.value = value;
      best.u = u_best;
      best.clean = clean;
      best.stage_trace = std::move(trace);
    }
  }

  // The depolarizing channel itself is always feasible; never report worse.
  const double origin_value = obj.eval(Eigen::VectorXd::Zero(d)).value;
  if (origin_value < best.value) {
    best.value = origin_value;
    best.u = Eigen::VectorXd::Zero(d);
  }

  OptimizationResult result;
  result.min_value = best.value;
  result.argmin = param.channel_at(best.u);
  result.iterations_used = total_iterations;
  result.min_choi_eig_at_opt = min_choi_eigenvalue(result.argmin);
  const ConstraintValues cv = constraint_values(ctx, joint_state(ctx, result.argmin));
  result.constraint_residual = std::max(std::abs(cv.match - param.targets.match),
                                        std::abs(cv.err - param.targets.err));
  result.stage_best_feasible = best.stage_trace;
  result.converged = best.clean && result.min_choi_eig_at_opt >= -1e-7 &&
                     result.constraint_residual <= 1e-7;
  return result;
}

FeasibleSample sample_feasible(const B92Context& ctx, double q, int n, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("sample_feasible: n must be at least 1");
  }
  const FeasibleParameterization param =
      feasible_parameterization(ctx, q, ParameterSpace::kReduced7);
  const int d = static_cast<int>(param.basis.size());
  std::mt19937_64 rng(splitmix64(seed));

  // Start from the unit box and halve it whenever a chunk of attempts
  // accepts too rarely: at the depolarizing rates of interest the CP body
  // occupies a tiny corner of the unit box, and a fixed-size box would burn
  // the whole attempt budget on infeasible points. The box never widens, so
  // a fixed seed still gives a bit-identical sample.
  double half_width = 1.0;
  const long chunk = std::max(100L, std::min(1000L, 2L * n));
  long chunk_attempts = 0;
  long chunk_accepts = 0;

  FeasibleSample out;
  const long max_attempts = 100L * n;
  out.channels.reserve(n);
  while (static_cast<long>(out.channels.size()) < n && out.attempts < max_attempts) {
    ++out.attempts;
    ++chunk_attempts;
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) {
      u(i) = half_width * uniform_pm1(rng);
    }
    BlochAffineChannel ch = param.channel_at(u);
    if (min_choi_eigenvalue(ch) >= -kChoiPsdTol) {
      ++chunk_accepts;
      out.channels.push_back(std::move(ch));
    }
    if (chunk_attempts >= chunk) {
      if (chunk_accepts < chunk / 20 && half_width > 1e-6) {
        half_width /= 2.0;
      }
      chunk_attempts = 0;
      chunk_accepts = 0;
    }
  }
  out.thin = static_cast<long>(out.channels.size()) < n;
  return out;
}

KeyRatePoint key_rate(const B92Context& ctx, double q, const OptimizationConfig& cfg) {
  KeyRatePoint point;
  point.q = q;
  point.alpha = ctx.alpha;
  const ComplexMatrix rho_dep = joint_state(ctx, depolarizing(q));
  point.p_acc = acceptance_probability(ctx, rho_dep);
  const ConstraintValues cv = constraint_values(ctx, rho_dep);
  point.c_match = cv.match;
  point.c_err = cv.err;
  point.h_xy = reconciliation_cost(ctx, rho_dep);
  point.diagnostics = minimize_ambiguity(ctx, q, cfg);
  point.s_min = point.diagnostics.min_value;
  point.key_rate = point.s_min / point.p_acc - point.h_xy;
  return point;
}

}  // namespace b92
