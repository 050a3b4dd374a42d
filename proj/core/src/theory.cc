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

#include "ahsc/theory.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ahsc/error.h"
#include "ahsc/random.h"

namespace ahsc {

namespace {

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double SquaredNorm(std::span<const double> a) { return Dot(a, a); }

std::vector<double> Minus(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

// Relative violation of lhs >= rhs.
double Violation(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  if (scale == 0.0) return 0.0;
  return (rhs - lhs) / scale;
}

// Folds violations into a report, remembering the worst witness.
class Tracker {
 public:
  Tracker(std::string id, const std::string& problem, double slack) {
    report_.id = std::move(id);
    report_.problem = problem;
    report_.slack = slack;
  }

  void Add(double violation, std::span<const double> witness) {
    if (report_.points_tested == 0 || violation > report_.max_violation) {
      report_.max_violation = violation;
      report_.witness.assign(witness.begin(), witness.end());
    }
    ++report_.points_tested;
  }

  CheckReport Finish() {
    report_.pass = report_.max_violation <= report_.slack;
    return std::move(report_);
  }

 private:
  CheckReport report_;
};

void RequireStrongConvexity(const QuadraticProblem& p) {
  if (!(p.mu > 0.0)) {
    Fail(ErrorKind::kNotStronglyConvex,
         "problem '" + p.name + "' has mu = 0; the inequality needs strong convexity");
  }
}

void CheckDim(const QuadraticProblem& p, std::span<const double> x) {
  if (x.size() != p.dim()) {
    Fail(ErrorKind::kShape, "point of dimension " + std::to_string(x.size()) +
                                " for a " + std::to_string(p.dim()) + "-dimensional problem");
  }
}

std::vector<double> Concat(std::span<const double> a, std::span<const double> b) {
  std::vector<double> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<double> ParseList(std::string_view s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    const std::string_view item = s.substr(start, comma - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() ||
        !std::isfinite(v)) {
      Fail(ErrorKind::kData, "bad number '" + std::string(item) + "' in matrix spec");
    }
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

}  // namespace

QuadraticProblem QuadraticProblem::FromHessian(SymmetricMatrix h, std::string name) {
  if (h.dim() == 0) Fail(ErrorKind::kData, "quadratic problem needs dim >= 1");
  if (!h.matrix().all_finite()) Fail(ErrorKind::kData, "quadratic problem has non-finite H");
  QuadraticProblem p;
  const EigenExtremes ext = sym_eig_extremes(h);
  const double tiny = 1e-12 * std::max(std::abs(ext.lambda_max), 1.0);
  if (ext.lambda_min < -tiny) {
    Fail(ErrorKind::kData, "H for '" + name + "' is indefinite (lambda_min = " +
                               std::to_string(ext.lambda_min) + ")");
  }
  p.name = std::move(name);
  p.h = std::move(h);
  p.mu = std::max(ext.lambda_min, 0.0);
  p.beta = std::max(ext.lambda_max, 0.0);
  return p;
}

double QuadraticProblem::value(std::span<const double> x) const {
  CheckDim(*this, x);
  return 0.5 * Dot(x, gradient(x));
}

std::vector<double> QuadraticProblem::gradient(std::span<const double> x) const {
  CheckDim(*this, x);
  std::vector<double> g(dim(), 0.0);
  for (std::size_t i = 0; i < dim(); ++i) {
    for (std::size_t j = 0; j < dim(); ++j) g[i] += h(i, j) * x[j];
  }
  return g;
}

CheckReport check_pl(const QuadraticProblem& p, std::span<const std::vector<double>> points) {
  RequireStrongConvexity(p);
  Tracker t("pl", p.name, kInequalitySlack);
  for (const auto& x : points) {
    const double lhs = 0.5 * SquaredNorm(p.gradient(x));
    const double rhs = p.mu * p.value(x);
    t.Add(Violation(lhs, rhs), x);
  }
  return t.Finish();
}

CheckReport check_grad_gap(const QuadraticProblem& p, std::span<const VectorPair> pairs) {
  RequireStrongConvexity(p);
  Tracker t("grad_gap", p.name, kInequalitySlack);
  for (const auto& [x, y] : pairs) {
    const auto dg = Minus(p.gradient(x), p.gradient(y));
    const double lhs = std::sqrt(SquaredNorm(dg));
    const double rhs = p.mu * std::sqrt(SquaredNorm(Minus(x, y)));
    t.Add(Violation(lhs, rhs), Concat(x, y));
  }
  return t.Finish();
}

CheckReport check_cocoercivity(const QuadraticProblem& p, std::span<const VectorPair> pairs) {
  RequireStrongConvexity(p);
  Tracker t("cocoercivity", p.name, kInequalitySlack);
  for (const auto& [x, y] : pairs) {
    const auto dg = Minus(p.gradient(x), p.gradient(y));
    const double inner = Dot(dg, Minus(x, y));
    const double bound = SquaredNorm(dg) / p.mu;
    t.Add(Violation(bound, inner), Concat(x, y));
  }
  return t.Finish();
}

CheckReport check_sandwich(const QuadraticProblem& p, std::span<const std::vector<double>> points) {
  RequireStrongConvexity(p);
  Tracker t("sandwich", p.name, kInequalitySlack);
  for (const auto& x : points) {
    const double upper = SquaredNorm(p.gradient(x)) / (2.0 * p.mu);
    const double gap = p.value(x);
    const double lower = 0.5 * p.mu * SquaredNorm(x);
    t.Add(std::max(Violation(upper, gap), Violation(gap, lower)), x);
  }
  return t.Finish();
}

std::vector<double> gd_trace(const QuadraticProblem& p, std::span<const double> x0,
                             std::size_t steps) {
  CheckDim(p, x0);
  if (!(p.beta > 0.0)) Fail(ErrorKind::kData, "gradient descent needs beta > 0");
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> values{p.value(x)};
  const double step = 1.0 / p.beta;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto g = p.gradient(x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= step * g[i];
    values.push_back(p.value(x));
  }
  return values;
}

CheckReport gd_convergence(const QuadraticProblem& p, std::span<const double> x0,
                           std::size_t steps) {
  const std::vector<double> values = gd_trace(p, x0, steps);
  Tracker t("gd_convergence", p.name, kInequalitySlack);
  const double rate = 1.0 - p.mu / p.beta;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double bound = std::pow(rate, static_cast<double>(k)) * values[0];
    const double index = static_cast<double>(k);
    t.Add(Violation(bound, values[k]), std::span<const double>(&index, 1));
  }
  return t.Finish();
}

CheckReport epoch_benefit(std::span<const double> history, double mu, double alpha,
                          double f0_minus_fstar) {
  Tracker t("epoch_benefit", "", kDecaySlack);
  const double rate = alpha * mu;
  for (std::size_t k = 0; k + 1 < history.size(); ++k) {
    const double improvement = history[k] - history[k + 1];
    const double bound = rate * std::exp(-rate * static_cast<double>(k)) * f0_minus_fstar;
    const double index = static_cast<double>(k);
    t.Add(Violation(bound, improvement), std::span<const double>(&index, 1));
  }
  return t.Finish();
}

QuadraticProblem IsotropicProblem(std::size_t dim, double mu) {
  std::vector<double> diag(dim, mu);
  auto p = QuadraticProblem::FromHessian(SymmetricMatrix(Matrix::Diagonal(diag)),
                                         "iso:" + std::to_string(dim));
  return p;
}

QuadraticProblem DiagonalProblem(std::span<const double> diag) {
  std::ostringstream name;
  name << "diag:";
  for (std::size_t i = 0; i < diag.size(); ++i) name << (i ? "," : "") << diag[i];
  return QuadraticProblem::FromHessian(SymmetricMatrix(Matrix::Diagonal(diag)), name.str());
}

QuadraticProblem RandomPsdProblem(std::size_t dim, std::uint64_t seed, double floor) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix b(dim, dim);
  for (double& x : b.entries()) x = normal(rng);
  Matrix h = Scaled(MatMulNT(b, b), 1.0 / static_cast<double>(dim));
  for (std::size_t i = 0; i < dim; ++i) h(i, i) += floor;
  return QuadraticProblem::FromHessian(SymmetricMatrix::Symmetrize(h),
                                       "random_psd:" + std::to_string(dim));
}

QuadraticProblem ParseProblem(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos) {
    Fail(ErrorKind::kData, "matrix spec '" + text + "' needs a kind prefix (diag:, iso:, rows:)");
  }
  const std::string kind = text.substr(0, colon);
  const std::string_view body = std::string_view(text).substr(colon + 1);
  if (kind == "diag") {
    const auto d = ParseList(body);
    return DiagonalProblem(d);
  }
  if (kind == "iso") {
    std::string list(body);
    std::replace(list.begin(), list.end(), ':', ',');
    const auto v = ParseList(list);
    if (v.size() != 2 || v[0] < 1 || v[0] != std::floor(v[0])) {
      Fail(ErrorKind::kData, "iso spec must be iso:DIM:MU");
    }
    return IsotropicProblem(static_cast<std::size_t>(v[0]), v[1]);
  }
  if (kind == "rows") {
    std::vector<std::vector<double>> rows;
    std::size_t start = 0;
    while (start <= body.size()) {
      const std::size_t semi = std::min(body.find(';', start), body.size());
      rows.push_back(ParseList(body.substr(start, semi - start)));
      start = semi + 1;
    }
    const std::size_t n = rows.size();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) Fail(ErrorKind::kData, "rows spec must describe a square matrix");
      for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (m(i, j) != m(j, i)) Fail(ErrorKind::kData, "rows spec must be symmetric");
      }
    }
    return QuadraticProblem::FromHessian(SymmetricMatrix(std::move(m)), text);
  }
  Fail(ErrorKind::kData, "unknown matrix kind '" + kind + "'");
}

std::vector<CheckReport> run_theory_suite(std::span<const QuadraticProblem> problems,
                                          std::uint64_t seed, const SuiteOptions& options) {
  std::vector<CheckReport> reports;
  Rng rng(seed);
  std::normal_distribution<double> normal;
  for (const auto& p : problems) {
    const std::size_t n = p.dim();
    auto draw = [&] {
      std::vector<double> x(n);
      for (double& v : x) v = normal(rng);
      return x;
    };
    std::vector<std::vector<double>> points{std::vector<double>(n, 0.0)};
    std::vector<VectorPair> pairs;
    for (std::size_t i = 0; i < options.points; ++i) {
      points.push_back(draw());
      auto x = draw();
      pairs.emplace_back(x, i == 0 ? x : draw());
    }
    reports.push_back(check_pl(p, points));
    reports.push_back(check_grad_gap(p, pairs));
    reports.push_back(check_cocoercivity(p, pairs));
    reports.push_back(check_sandwich(p, points));
    const std::vector<double> x0 = draw();
    reports.push_back(gd_convergence(p, x0, options.gd_steps));
    if (options.decay_on_all || p.mu == p.beta) {
      const auto trace = gd_trace(p, x0, options.gd_steps);
      CheckReport decay = epoch_benefit(trace, p.mu, 1.0 / p.beta, trace.front());
      decay.problem = p.name;
      reports.push_back(std::move(decay));
    }
  }
  return reports;
}

std::string ToJsonLine(const CheckReport& report) {
  nlohmann::ordered_json j;
  j["id"] = report.id;
  j["problem"] = report.problem;
  j["points_tested"] = report.points_tested;
  j["max_violation"] = report.max_violation;
  j["slack"] = report.slack;
  j["pass"] = report.pass;
  j["witness"] = report.witness;
  return j.dump();
}

}  // namespace ahsc
