// Copyright 2026 The AHSC Authors
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

// Executable versions of the strong-convexity inequalities, evaluated on
// quadratics f(x) = x^T H x / 2 where mu = lambda_min(H), beta = lambda_max(H)
// and x* = 0 are known exactly.
//
// Every check reduces an inequality lhs >= rhs to the relative violation
// (rhs - lhs) / max(|lhs|, |rhs|) (0 when both sides are 0) and reports the
// worst one; it passes when that stays within the slack.

#ifndef AHSC_THEORY_H_
#define AHSC_THEORY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ahsc/linalg.h"

namespace ahsc {

struct QuadraticProblem {
  std::string name;
  SymmetricMatrix h;
  double mu = 0.0;
  double beta = 0.0;

  // Extremes come from the Jacobi solver. Throws kData when H is indefinite
  // beyond rounding; tiny negative lambda_min is clamped to 0.
  static QuadraticProblem FromHessian(SymmetricMatrix h, std::string name);

  double value(std::span<const double> x) const;
  std::vector<double> gradient(std::span<const double> x) const;
  std::size_t dim() const { return h.dim(); }
};

struct CheckReport {
  std::string id;
  std::string problem;
  std::size_t points_tested = 0;
  double max_violation = 0.0;
  double slack = 0.0;
  bool pass = true;
  // Point (or step index, for trace checks) where the worst violation sits.
  std::vector<double> witness;
};

inline constexpr double kInequalitySlack = 1e-12;
inline constexpr double kDecaySlack = 1e-9;

using VectorPair = std::pair<std::vector<double>, std::vector<double>>;

// The checks below throw kNotStronglyConvex when mu == 0.

// ||grad f(x)||^2 / 2 >= mu (f(x) - f(x*))
CheckReport check_pl(const QuadraticProblem& p, std::span<const std::vector<double>> points);

// ||grad f(x) - grad f(y)|| >= mu ||x - y||
CheckReport check_grad_gap(const QuadraticProblem& p, std::span<const VectorPair> pairs);

// (grad f(x) - grad f(y))^T (x - y) <= ||grad f(x) - grad f(y)||^2 / mu
CheckReport check_cocoercivity(const QuadraticProblem& p, std::span<const VectorPair> pairs);

// ||grad f(x)||^2 / (2 mu) >= f(x) - f(x*) >= mu ||x - x*||^2 / 2
CheckReport check_sandwich(const QuadraticProblem& p, std::span<const std::vector<double>> points);

// f(x_k) for k = 0..steps under x_{k+1} = x_k - grad f(x_k) / beta.
std::vector<double> gd_trace(const QuadraticProblem& p, std::span<const double> x0,
                             std::size_t steps);

// f(x_k) - f* <= (1 - mu/beta)^k (f(x_0) - f*) for every k <= steps.
// Throws kData when beta == 0.
CheckReport gd_convergence(const QuadraticProblem& p, std::span<const double> x0,
                           std::size_t steps);

// Per-step improvement f(x_t) - f(x_{t+1}) <= alpha mu exp(-alpha mu t) gap0
// for every consecutive pair in `history`. This is the magnitude reading of
// the exponential-decay argument; it is tight for isotropic H with
// alpha = 1/beta and can fail on anisotropic quadratics, where the first
// step removes more than an alpha*mu fraction of the gap.
CheckReport epoch_benefit(std::span<const double> history, double mu, double alpha,
                          double f0_minus_fstar);

QuadraticProblem IsotropicProblem(std::size_t dim, double mu);
QuadraticProblem DiagonalProblem(std::span<const double> diag);
// (B B^T) / dim + floor * I with Gaussian B, so mu >= floor > 0.
QuadraticProblem RandomPsdProblem(std::size_t dim, std::uint64_t seed, double floor = 0.1);

// Parses "diag:1,4", "iso:DIM:MU" or "rows:a,b;c,d" (must be symmetric).
// Throws kData on malformed input.
QuadraticProblem ParseProblem(const std::string& text);

struct SuiteOptions {
  std::size_t points = 64;
  std::size_t gd_steps = 100;
  // epoch_benefit normally runs only where mu == beta, the regime in which
  // its bound is exact. Set to run it on every problem.
  bool decay_on_all = false;
};

// Runs pl, grad_gap, cocoercivity, sandwich and gd_convergence on each
// problem with random probes drawn from `seed`, plus epoch_benefit on the GD
// trace (alpha = 1/beta) as selected by the options.
std::vector<CheckReport> run_theory_suite(std::span<const QuadraticProblem> problems,
                                          std::uint64_t seed, const SuiteOptions& options = {});

std::string ToJsonLine(const CheckReport& report);

}  // namespace ahsc

#endif  // AHSC_THEORY_H_
