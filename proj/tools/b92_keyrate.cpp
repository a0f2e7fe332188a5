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

// Command-line front end for the B92 asymptotic key-rate calculator.
//
// Modes:
//   single       one (alpha, q) evaluation
//   sweep        q grid at fixed alpha (the data behind the rate-vs-q curve)
//   threshold    bisection for the zero-rate crossing q*
//   alpha-sweep  alpha grid at fixed q
//
// Output is RFC-4180-style CSV (header row, '.' decimal, LF endings) with 12
// significant digits. Exit codes: 0 all points converged, 1 usage error,
// 2 at least one non-converged point (rows are still emitted, flagged in the
// `converged` column), 3 threshold bracket failure.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "b92/optimizer.hpp"

namespace {

constexpr char kPointHeader[] =
    "q,alpha,p_acc,c_match,c_err,h_xy,s_min,key_rate,converged,iterations,min_choi_eig";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_point_row(std::ostream& os, const b92::KeyRatePoint& pt) {
  os << fmt(pt.q) << ',' << fmt(pt.alpha) << ',' << fmt(pt.p_acc) << ',' << fmt(pt.c_match)
     << ',' << fmt(pt.c_err) << ',' << fmt(pt.h_xy) << ',' << fmt(pt.s_min) << ','
     << fmt(pt.key_rate) << ',' << (pt.diagnostics.converged ? "true" : "false") << ','
     << pt.diagnostics.iterations_used << ',' << fmt(pt.diagnostics.min_choi_eig_at_opt)
     << '\n';
}

int usage_error(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 1;
}

// Evaluates key_rate over (alpha, q) points on a small worker pool. Every
// point is internally deterministic, so the thread count never changes the
// emitted rows; results are stored by index and written in input order.
std::vector<b92::KeyRatePoint> evaluate_points(
    const std::vector<std::pair<double, double>>& alpha_q,
    const b92::OptimizationConfig& cfg, int jobs) {
  std::vector<b92::KeyRatePoint> results(alpha_q.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= alpha_q.size() || failed.load()) {
        return;
      }
      try {
        const b92::B92Context ctx = b92::make_context(alpha_q[i].first);
        results[i] = b92::key_rate(ctx, alpha_q[i].second, cfg);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) {
          error = std::current_exception();
        }
      }
    }
  };

  const int threads =
      std::max(1, std::min<int>(jobs, static_cast<int>(alpha_q.size())));
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int i = 0; i < threads - 1; ++i) {
    pool.emplace_back(worker);
  }
  worker();
  for (std::thread& th : pool) {
    th.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
  return results;
}

int emit_points(std::ostream& os, const std::vector<b92::KeyRatePoint>& points) {
  os << kPointHeader << '\n';
  bool all_converged = true;
  for (const b92::KeyRatePoint& pt : points) {
    write_point_row(os, pt);
    all_converged = all_converged && pt.diagnostics.converged;
  }
  os.flush();
  return all_converged ? 0 : 2;
}

int run_threshold(std::ostream& os, double alpha, double q_lo, double q_hi,
                  const b92::OptimizationConfig& cfg) {
  const b92::B92Context ctx = b92::make_context(alpha);
  long calls = 0;
  bool all_converged = true;
  const auto rate_at = [&](double q) {
    ++calls;
    const b92::KeyRatePoint pt = b92::key_rate(ctx, q, cfg);
    all_converged = all_converged && pt.diagnostics.converged;
    return pt.key_rate;
  };

  double rate_lo = rate_at(q_lo);
  double rate_hi = rate_at(q_hi);
  if (!(rate_lo > 0.0 && rate_hi < 0.0)) {
    std::cerr << "error: bracket [" << fmt(q_lo) << ", " << fmt(q_hi)
              << "] does not straddle zero (rates " << fmt(rate_lo) << ", " << fmt(rate_hi)
              << ")\n";
    return 3;
  }

  while (q_hi - q_lo > 1e-4) {
    const double mid = (q_lo + q_hi) / 2.0;
    const double rate_mid = rate_at(mid);
    if (rate_mid > 0.0) {
      q_lo = mid;
      rate_lo = rate_mid;
    } else {
      q_hi = mid;
      rate_hi = rate_mid;
    }
  }

  os << "alpha,q_lo,q_hi,rate_lo,rate_hi,q_star,optimizer_calls\n";
  os << fmt(alpha) << ',' << fmt(q_lo) << ',' << fmt(q_hi) << ',' << fmt(rate_lo) << ','
     << fmt(rate_hi) << ',' << fmt((q_lo + q_hi) / 2.0) << ',' << calls << '\n';
  os.flush();
  return all_converged ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic key rate of the single-photon B92 protocol over a "
               "depolarizing channel, via conditional-entropy minimization over "
               "all completely positive channels consistent with the observed "
               "statistics."};

  std::string mode = "single";
  double alpha = 0.39;
  std::optional<double> q;
  std::optional<double> q_start;
  std::optional<double> q_end;
  double q_step = 0.002;
  double alpha_start = 0.30;
  double alpha_end = 0.50;
  double alpha_step = 0.02;
  std::string output = "-";
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) {
    jobs = 1;
  }
  b92::OptimizationConfig cfg;

  app.add_option("--mode", mode, "single | sweep | threshold | alpha-sweep")
      ->check(CLI::IsMember({"single", "sweep", "threshold", "alpha-sweep"}));
  app.add_option("--alpha", alpha, "signal amplitude, in (0, 1/sqrt(2))")
      ->capture_default_str();
  app.add_option("--q", q, "depolarizing rate (single, alpha-sweep)");
  app.add_option("--q-start", q_start, "first q (sweep) / lower bracket (threshold)");
  app.add_option("--q-end", q_end, "last q (sweep) / upper bracket (threshold)");
  app.add_option("--q-step", q_step, "q grid step (sweep)")->capture_default_str();
  app.add_option("--alpha-start", alpha_start, "first alpha (alpha-sweep)")
      ->capture_default_str();
  app.add_option("--alpha-end", alpha_end, "last alpha (alpha-sweep)")->capture_default_str();
  app.add_option("--alpha-step", alpha_step, "alpha grid step (alpha-sweep)")
      ->capture_default_str();
  app.add_option("--restarts", cfg.restarts, "optimizer restarts per point")
      ->capture_default_str();
  app.add_option("--max-iter", cfg.max_iterations, "iteration budget per restart")
      ->capture_default_str();
  app.add_option("--tol", cfg.convergence_tol, "gradient-norm convergence tolerance (bits)")
      ->capture_default_str();
  app.add_option("--seed", cfg.rng_seed, "RNG seed")->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads for sweeps (default: processor count)");
  app.add_option("--output", output, "output file, or - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp") {
      return app.exit(e);
    }
    app.exit(e);
    return 1;
  }

  constexpr double kAlphaMax = 0.70710678118654752440;
  if (!(alpha > 0.0 && alpha < kAlphaMax)) {
    return usage_error("--alpha must lie in (0, 1/sqrt(2))");
  }
  if (cfg.restarts < 1 || cfg.max_iterations < 1 || cfg.convergence_tol <= 0) {
    return usage_error("--restarts, --max-iter and --tol must be positive");
  }
  if (jobs < 1) {
    return usage_error("--jobs must be positive");
  }
  const auto valid_q = [](double value) { return value >= 0.0 && value <= 1.0; };

  std::ofstream file;
  if (output != "-") {
    file.open(output, std::ios::binary);  // binary keeps LF endings everywhere
    if (!file) {
      return usage_error("cannot open output file '" + output + "'");
    }
  }
  std::ostream& os = (output == "-") ? std::cout : file;

  try {
    if (mode == "single") {
      if (!q) {
        return usage_error("--q is required in single mode");
      }
      if (!valid_q(*q)) {
        return usage_error("--q must lie in [0, 1]");
      }
      return emit_points(os, evaluate_points({{alpha, *q}}, cfg, 1));
    }

    if (mode == "sweep") {
      if (!q_start || !q_end) {
        return usage_error("--q-start and --q-end are required in sweep mode");
      }
      if (!valid_q(*q_start) || !valid_q(*q_end) || *q_start > *q_end) {
        return usage_error("sweep needs 0 <= q-start <= q-end <= 1");
      }
      if (q_step <= 0) {
        return usage_error("--q-step must be positive");
      }
      std::vector<std::pair<double, double>> points;
      for (int i = 0;; ++i) {
        const double value = *q_start + i * q_step;
        if (value > *q_end + 1e-12) {
          break;
        }
        points.emplace_back(alpha, std::min(value, *q_end));
      }
      return emit_points(os, evaluate_points(points, cfg, jobs));
    }

    if (mode == "alpha-sweep") {
      if (!q) {
        return usage_error("--q is required in alpha-sweep mode");
      }
      if (!valid_q(*q)) {
        return usage_error("--q must lie in [0, 1]");
      }
      if (alpha_step <= 0 || alpha_start > alpha_end || alpha_start <= 0.0 ||
          alpha_end >= kAlphaMax) {
        return usage_error("alpha-sweep needs 0 < alpha-start <= alpha-end < 1/sqrt(2)");
      }
      std::vector<std::pair<double, double>> points;
      for (int i = 0;; ++i) {
        const double value = alpha_start + i * alpha_step;
        if (value > alpha_end + 1e-12) {
          break;
        }
        points.emplace_back(std::min(value, alpha_end), *q);
      }
      return emit_points(os, evaluate_points(points, cfg, jobs));
    }

    // threshold
    if (!q_start || !q_end) {
      return usage_error("--q-start and --q-end are required in threshold mode");
    }
    if (!valid_q(*q_start) || !valid_q(*q_end) || *q_start >= *q_end) {
      return usage_error("threshold needs 0 <= q-start < q-end <= 1");
    }
    return run_threshold(os, alpha, *q_start, *q_end, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
