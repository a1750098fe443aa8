// SPDX-License-Identifier: MIT
//
// The n-translation problem: X(t) = exp(n t A) e_0 where A is the transpose
// of the alpha-derivative matrix.  For the canonical family alpha_k = k/n the
// path is exactly the binomial pmf t -> b_{n,t} and X(1) = e_n; the flags
// computed here measure how far an arbitrary family is from being such a
// fundamental solution (negativity along the path, residual at t = 1, mass
// drift).  Mass is conserved along the path iff alpha_0 = 0 and alpha_n = 1:
// the column sums of n A equal the row sums of the derivative matrix, which
// vanish at interior rows and are alpha_0 and alpha_n - 1 at the boundary.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nablan/measure.hpp"
#include "nablan/operators.hpp"
#include "nablan/scalar.hpp"
#include "nablan/types.hpp"

namespace nablan {

// Path-quality tolerances (float backend), pinned once.
inline constexpr double kNegativityTol = 1e-10;
inline constexpr double kFinalResidualTol = 1e-10;
inline constexpr double kExteriorMassTol = 1e-10;

// ---------------------------------------------------------------------------
// Dense matrix exponential, scaling-and-squaring with a Taylor core.  The
// argument is halved until the infinity norm is <= 1/2, where the truncated
// series (terms added until they stop changing the partial sum at ~1e-18
// relative) has remainder far below 1e-14, then the result is repeatedly
// squared.  Plenty for the (n+1) <= ~60 generators this project meets.

inline OperatorMatrix<double> matrix_exponential(const OperatorMatrix<double>& a,
                                                 double s) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("matrix_exponential: matrix must be square");
  const Index dim = a.rows();
  OperatorMatrix<double> b = s * a;
  if (!b.allFinite())
    throw std::invalid_argument("matrix_exponential: non-finite entries");

  const double norm = b.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    b /= std::pow(2.0, squarings);
  }

  OperatorMatrix<double> result = OperatorMatrix<double>::Identity(dim, dim);
  OperatorMatrix<double> term = OperatorMatrix<double>::Identity(dim, dim);
  for (int j = 1; j <= 40; ++j) {
    term = (term * b / double(j)).eval();
    result += term;
    const double term_norm = term.cwiseAbs().maxCoeff();
    const double result_norm = result.cwiseAbs().maxCoeff();
    if (term_norm <= 1e-18 * result_norm) break;
  }
  for (int q = 0; q < squarings; ++q) result = (result * result).eval();
  return result;
}

// ---------------------------------------------------------------------------
// Generator and evolution.

// A = (alpha-derivative matrix)^T; exact in the rational backend, which is
// how the canonical-family identity A = matrix of nabla_star is testable.
template <ScalarField S>
OperatorMatrix<S> generator_matrix(const DerivativeFamily<S>& family) {
  return alpha_derivative_matrix(family).transpose();
}

// X(time) = exp(n * time * A) e_0.
inline GridFunction<double> evolve(const DerivativeFamily<double>& family, double time) {
  const Index n = family.n();
  const OperatorMatrix<double> a = generator_matrix(family);
  const OperatorMatrix<double> propagator = matrix_exponential(a, double(n) * time);
  return propagator.col(0);
}

// ---------------------------------------------------------------------------
// Path evaluation over a time grid.

struct TranslationPath {
  std::vector<double> times;      // sorted, times.front() == 0, times.back() == 1
  OperatorMatrix<double> states;  // column j = X(times[j])
  double min_entry = 0.0;         // most negative value seen along the path
  double final_residual = 0.0;    // |X(1) - e_n|_inf
  double max_mass_drift = 0.0;    // max_j |sum_k X(t_j)(k) - 1|
  bool fundamental_flag = false;
};

inline std::vector<double> uniform_time_grid(int points) {
  if (points < 2) throw std::invalid_argument("uniform_time_grid: need >= 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] =
      double(i) / double(points - 1);
  grid.front() = 0.0;
  grid.back() = 1.0;
  return grid;
}

// Evaluates X over the grid and decides fundamental-ness: every entry
// >= -kNegativityTol along the path and X(1) within kFinalResidualTol of
// e_n.  The grid must lie in [0, 1] and contain both endpoints.
inline TranslationPath is_fundamental_solution(const DerivativeFamily<double>& family,
                                               std::vector<double> time_grid) {
  if (time_grid.empty())
    throw std::invalid_argument("is_fundamental_solution: empty time grid");
  std::sort(time_grid.begin(), time_grid.end());
  if (time_grid.front() < 0.0 || time_grid.back() > 1.0)
    throw std::invalid_argument("is_fundamental_solution: grid must lie in [0, 1]");
  if (time_grid.front() != 0.0 || time_grid.back() != 1.0)
    throw std::invalid_argument("is_fundamental_solution: grid must contain 0 and 1");

  const Index n = family.n();
  const OperatorMatrix<double> a = generator_matrix(family);

  TranslationPath path;
  path.times = std::move(time_grid);
  path.states.resize(n + 1, static_cast<Index>(path.times.size()));
  path.min_entry = 0.0;
  for (std::size_t j = 0; j < path.times.size(); ++j) {
    const OperatorMatrix<double> propagator =
        matrix_exponential(a, double(n) * path.times[j]);
    path.states.col(static_cast<Index>(j)) = propagator.col(0);
    path.min_entry = std::min(path.min_entry,
                              path.states.col(static_cast<Index>(j)).minCoeff());
    Accumulator<double> mass;
    for (Index k = 0; k <= n; ++k) mass.add(path.states(k, static_cast<Index>(j)));
    path.max_mass_drift = std::max(path.max_mass_drift, std::abs(mass.total() - 1.0));
  }

  GridFunction<double> target = delta_function<double>(n, n);
  path.final_residual =
      (path.states.col(static_cast<Index>(path.times.size()) - 1) - target)
          .cwiseAbs()
          .maxCoeff();
  path.fundamental_flag =
      path.min_entry >= -kNegativityTol && path.final_residual <= kFinalResidualTol;
  return path;
}

// ---------------------------------------------------------------------------
// Necessary conditions alpha_0 = 0, alpha_n = 1 (exact comparisons in S).

struct NecessaryConditions {
  bool ok = true;
  std::vector<std::string> violations;
};

template <ScalarField S>
NecessaryConditions necessary_conditions(const DerivativeFamily<S>& family) {
  NecessaryConditions out;
  if (family.alpha[0] != S(0)) {
    out.ok = false;
    out.violations.push_back("alpha_0 = " + scalar_repr(family.alpha[0]) +
                             " (must be 0: mass leaks below the grid)");
  }
  if (family.alpha[family.n()] != S(1)) {
    out.ok = false;
    out.violations.push_back("alpha_n = " + scalar_repr(family.alpha[family.n()]) +
                             " (must be 1: mass leaks above the grid)");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transport identity d/dt E_{b_t}[f] = n E_{b_t}[nabla_n f].

// Exact variant: lhs through the closed-form pmf time derivative; returns
// {lhs, rhs} which agree identically (testable as equality in Q).
template <ScalarField S>
std::pair<S, S> transport_identity_exact(const GridFunction<S>& f,
                                         const BinomialParams<S>& params) {
  if (f.size() != params.n + 1)
    throw std::invalid_argument("transport_identity_exact: f length mismatch");
  const GridFunction<S> db = pmf_time_derivative(params);
  Accumulator<S> lhs;
  for (Index k = 0; k <= params.n; ++k) lhs.add(f[k] * db[k]);
  const WeightVector<S> b = binomial_pmf(params);
  const GridFunction<S> grad = nabla_n(f);
  Accumulator<S> rhs;
  for (Index k = 0; k <= params.n; ++k) rhs.add(grad[k] * b.values[k]);
  return {lhs.total(), scalar_from_index<S>(params.n) * rhs.total()};
}

struct TransportIdentityReport {
  double lhs = 0.0;  // centered difference of t -> E_{b_t}[f]
  double rhs = 0.0;  // n E_{b_t}[nabla_n f]
  double deviation = 0.0;
};

// Finite-difference variant with step h (second-order: deviation shrinks
// ~4x when h halves).  Requires t - h and t + h interior.
inline TransportIdentityReport transport_identity_check(const GridFunction<double>& f,
                                                        const BinomialParams<double>& params,
                                                        double h) {
  if (!(h > 0.0)) throw std::invalid_argument("transport_identity_check: h must be > 0");
  if (!(params.t - h > 0.0 && params.t + h < 1.0))
    throw std::invalid_argument("transport_identity_check: t +/- h must stay in (0, 1)");
  if (f.size() != params.n + 1)
    throw std::invalid_argument("transport_identity_check: f length mismatch");

  const BinomialParams<double> plus(params.n, params.t + h);
  const BinomialParams<double> minus(params.n, params.t - h);
  const WeightVector<double> b_plus = binomial_pmf(plus);
  const WeightVector<double> b_minus = binomial_pmf(minus);
  const WeightVector<double> b_mid = binomial_pmf(params);

  Accumulator<double> e_plus, e_minus, e_grad;
  const GridFunction<double> grad = nabla_n(f);
  for (Index k = 0; k <= params.n; ++k) {
    e_plus.add(f[k] * b_plus.values[k]);
    e_minus.add(f[k] * b_minus.values[k]);
    e_grad.add(grad[k] * b_mid.values[k]);
  }

  TransportIdentityReport report;
  report.lhs = (e_plus.total() - e_minus.total()) / (2.0 * h);
  report.rhs = double(params.n) * e_grad.total();
  report.deviation = std::abs(report.lhs - report.rhs);
  return report;
}

// ---------------------------------------------------------------------------
// Support confinement: embed {0,...,n} in {-m,...,n+m} with alpha = 0 below
// 0 and alpha = 1 above n (so the extension conserves mass globally and any
// exterior mass is attributable to the family, not the embedding), run the
// same evolution from delta_0, and report the worst exterior mass.

struct SupportReport {
  bool confined = true;
  double max_exterior_mass = 0.0;
};

inline SupportReport support_confinement_check(const DerivativeFamily<double>& family,
                                               const std::vector<double>& time_grid,
                                               Index margin) {
  if (margin < 0)
    throw std::invalid_argument("support_confinement_check: margin must be >= 0");
  const Index n = family.n();
  const Index ext_n = n + 2 * margin;

  GridFunction<double> alpha_ext(ext_n + 1);
  for (Index j = 0; j <= ext_n; ++j) {
    const Index site = j - margin;
    if (site < 0)
      alpha_ext[j] = 0.0;
    else if (site > n)
      alpha_ext[j] = 1.0;
    else
      alpha_ext[j] = family.alpha[site];
  }
  const DerivativeFamily<double> extended(std::move(alpha_ext));
  const OperatorMatrix<double> a = generator_matrix(extended);

  SupportReport report;
  for (double time : time_grid) {
    if (time < 0.0 || time > 1.0)
      throw std::invalid_argument("support_confinement_check: grid must lie in [0, 1]");
    // Same physical time scale as the original problem: n, not ext_n.
    const OperatorMatrix<double> propagator = matrix_exponential(a, double(n) * time);
    const GridFunction<double> state = propagator.col(margin);
    Accumulator<double> exterior;
    for (Index j = 0; j <= ext_n; ++j)
      if (j < margin || j > margin + n) exterior.add(std::abs(state[j]));
    report.max_exterior_mass = std::max(report.max_exterior_mass, exterior.total());
  }
  report.confined = report.max_exterior_mass <= kExteriorMassTol;
  return report;
}

}  // namespace nablan
