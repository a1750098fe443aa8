// SPDX-License-Identifier: MIT
//
// The interpolated derivative nabla_n on {0,...,n}, the general alpha-
// interpolated family it belongs to, the unweighted adjoint nabla_star, the
// b_{n,t}-weighted adjoint nabla_tilde, and dense matrix realizations of all
// of them.  Out-of-range values are zero-padded: f(-1) = f(n+1) = 0.
//
// Stencils (row k of the matrix, columns k-1, k, k+1):
//   nabla_n:      -k/n,                (2k-n)/n,   (n-k)/n
//   alpha family: -alpha_k,            2 alpha_k - 1,  1 - alpha_k
//   nabla_star:   (n-k+1)/n,           (2k-n)/n,   -(k+1)/n
//   nabla_tilde:  (k/n)((1-t)/t),      (2k-n)/n,   -((n-k)/n)(t/(1-t))
// The matrices are built from these closed forms, NOT by applying the
// pointwise operators to basis vectors, so "matrix times e_j equals the
// pointwise action" is a genuine cross-check in the tests.

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nablan/measure.hpp"
#include "nablan/scalar.hpp"
#include "nablan/types.hpp"

namespace nablan {

namespace detail {

template <ScalarField S>
Index grid_order(const GridFunction<S>& f, const char* what) {
  if (f.size() < 2)
    throw std::invalid_argument(std::string(what) + ": need at least two grid points");
  return f.size() - 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pointwise operators.

// Forward difference, f(n+1) = 0.
template <ScalarField S>
GridFunction<S> nabla_right(const GridFunction<S>& f) {
  const Index n = detail::grid_order(f, "nabla_right");
  GridFunction<S> g(n + 1);
  for (Index k = 0; k <= n; ++k) g[k] = (k < n ? f[k + 1] : S(0)) - f[k];
  return g;
}

// Backward difference, f(-1) = 0.
template <ScalarField S>
GridFunction<S> nabla_left(const GridFunction<S>& f) {
  const Index n = detail::grid_order(f, "nabla_left");
  GridFunction<S> g(n + 1);
  for (Index k = 0; k <= n; ++k) g[k] = f[k] - (k > 0 ? f[k - 1] : S(0));
  return g;
}

// nabla_n f(k) = (k/n)(f(k) - f(k-1)) + ((n-k)/n)(f(k+1) - f(k)).
template <ScalarField S>
GridFunction<S> nabla_n(const GridFunction<S>& f) {
  const Index n = detail::grid_order(f, "nabla_n");
  const S inv_n = S(1) / scalar_from_index<S>(n);
  GridFunction<S> g(n + 1);
  for (Index k = 0; k <= n; ++k) {
    const S left = f[k] - (k > 0 ? f[k - 1] : S(0));
    const S right = (k < n ? f[k + 1] : S(0)) - f[k];
    g[k] = (scalar_from_index<S>(k) * left + scalar_from_index<S>(n - k) * right) * inv_n;
  }
  return g;
}

// ---------------------------------------------------------------------------
// The alpha-interpolated family nabla f(k) =
// alpha_k (f(k) - f(k-1)) + (1 - alpha_k)(f(k+1) - f(k)).

template <ScalarField S>
struct DerivativeFamily {
  GridFunction<S> alpha;

  explicit DerivativeFamily(GridFunction<S> a) : alpha(std::move(a)) {
    if (alpha.size() < 2)
      throw std::invalid_argument("DerivativeFamily: need at least two grid points");
    for (Index k = 0; k < alpha.size(); ++k)
      if (alpha[k] < S(0) || alpha[k] > S(1))
        throw std::invalid_argument("DerivativeFamily: alpha_" + std::to_string(k) +
                                    " outside [0, 1]");
  }

  Index n() const { return alpha.size() - 1; }

  // alpha_k = k/n: reproduces nabla_n.
  static DerivativeFamily canonical(Index n) {
    if (n < 1) throw std::invalid_argument("DerivativeFamily: n must be >= 1");
    GridFunction<S> a(n + 1);
    const S inv_n = S(1) / scalar_from_index<S>(n);
    for (Index k = 0; k <= n; ++k) a[k] = scalar_from_index<S>(k) * inv_n;
    return DerivativeFamily(std::move(a));
  }

  // alpha == 1: pure backward difference.
  static DerivativeFamily left(Index n) {
    return DerivativeFamily(constant_function<S>(n, S(1)));
  }

  // alpha == 0: pure forward difference.
  static DerivativeFamily right(Index n) {
    return DerivativeFamily(constant_function<S>(n, S(0)));
  }

  static DerivativeFamily constant(Index n, const S& a) {
    return DerivativeFamily(constant_function<S>(n, a));
  }
};

template <ScalarField S>
GridFunction<S> alpha_derivative(const DerivativeFamily<S>& family,
                                 const GridFunction<S>& f) {
  require_same_length(f, family.alpha, "alpha_derivative");
  const Index n = detail::grid_order(f, "alpha_derivative");
  GridFunction<S> g(n + 1);
  for (Index k = 0; k <= n; ++k) {
    const S left = f[k] - (k > 0 ? f[k - 1] : S(0));
    const S right = (k < n ? f[k + 1] : S(0)) - f[k];
    g[k] = family.alpha[k] * left + (S(1) - family.alpha[k]) * right;
  }
  return g;
}

// Parses a family description: "canonical", "left", "right", "const:<x>",
// or "values:<a0>,<a1>,...,<an>" (which must supply exactly n+1 entries).
template <ScalarField S>
DerivativeFamily<S> family_from_spec(Index n, const std::string& spec) {
  if (spec == "canonical") return DerivativeFamily<S>::canonical(n);
  if (spec == "left") return DerivativeFamily<S>::left(n);
  if (spec == "right") return DerivativeFamily<S>::right(n);
  if (spec.rfind("const:", 0) == 0)
    return DerivativeFamily<S>::constant(n, scalar_from_string<S>(spec.substr(6)));
  if (spec.rfind("values:", 0) == 0) {
    std::stringstream ss(spec.substr(7));
    std::string item;
    std::vector<S> vals;
    while (std::getline(ss, item, ',')) vals.push_back(scalar_from_string<S>(item));
    if (static_cast<Index>(vals.size()) != n + 1)
      throw std::invalid_argument("family_from_spec: 'values:' needs exactly " +
                                  std::to_string(n + 1) + " entries, got " +
                                  std::to_string(vals.size()));
    GridFunction<S> a(n + 1);
    for (Index k = 0; k <= n; ++k) a[k] = vals[static_cast<std::size_t>(k)];
    return DerivativeFamily<S>(std::move(a));
  }
  throw std::invalid_argument("family_from_spec: unknown family '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Adjoints.

// Unweighted adjoint: <nabla_n f, g> = <f, nabla_star g> for all f, g.
// nabla_star g(k) = (1/n)[(n-k+1) g(k-1) - (n-2k) g(k) - (k+1) g(k+1)].
template <ScalarField S>
GridFunction<S> nabla_star(const GridFunction<S>& g) {
  const Index n = detail::grid_order(g, "nabla_star");
  const S inv_n = S(1) / scalar_from_index<S>(n);
  GridFunction<S> r(n + 1);
  for (Index k = 0; k <= n; ++k) {
    S acc = S(0);
    if (k > 0) acc += scalar_from_index<S>(n - k + 1) * g[k - 1];
    acc -= (scalar_from_index<S>(n) - S(2) * scalar_from_index<S>(k)) * g[k];
    if (k < n) acc -= scalar_from_index<S>(k + 1) * g[k + 1];
    r[k] = acc * inv_n;
  }
  return r;
}

// b_{n,t}-weighted adjoint: <nabla_n f, g>_b = <f, nabla_tilde g>_b.
// nabla_tilde f(k) = (k/n)((1-t)/t) f(k-1) - ((n-2k)/n) f(k)
//                    - ((n-k)/n)(t/(1-t)) f(k+1).
template <ScalarField S>
GridFunction<S> nabla_tilde(const BinomialParams<S>& params, const GridFunction<S>& f) {
  params.require_interior("nabla_tilde");
  const Index n = params.n;
  if (f.size() != n + 1)
    throw std::invalid_argument("nabla_tilde: f length does not match params.n + 1");
  const S inv_n = S(1) / scalar_from_index<S>(n);
  const S up = params.t / (S(1) - params.t);       // t/(1-t)
  const S down = (S(1) - params.t) / params.t;     // (1-t)/t
  GridFunction<S> g(n + 1);
  for (Index k = 0; k <= n; ++k) {
    S acc = S(0);
    if (k > 0) acc += scalar_from_index<S>(k) * down * f[k - 1];
    acc -= (scalar_from_index<S>(n) - S(2) * scalar_from_index<S>(k)) * f[k];
    if (k < n) acc -= scalar_from_index<S>(n - k) * up * f[k + 1];
    g[k] = acc * inv_n;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Dense matrix realizations.

template <ScalarField S>
OperatorMatrix<S> nabla_n_matrix(Index n) {
  if (n < 1) throw std::invalid_argument("nabla_n_matrix: n must be >= 1");
  OperatorMatrix<S> m = OperatorMatrix<S>::Zero(n + 1, n + 1);
  const S inv_n = S(1) / scalar_from_index<S>(n);
  for (Index k = 0; k <= n; ++k) {
    if (k > 0) m(k, k - 1) = -scalar_from_index<S>(k) * inv_n;
    m(k, k) = (S(2) * scalar_from_index<S>(k) - scalar_from_index<S>(n)) * inv_n;
    if (k < n) m(k, k + 1) = scalar_from_index<S>(n - k) * inv_n;
  }
  return m;
}

template <ScalarField S>
OperatorMatrix<S> alpha_derivative_matrix(const DerivativeFamily<S>& family) {
  const Index n = family.n();
  OperatorMatrix<S> m = OperatorMatrix<S>::Zero(n + 1, n + 1);
  for (Index k = 0; k <= n; ++k) {
    if (k > 0) m(k, k - 1) = -family.alpha[k];
    m(k, k) = S(2) * family.alpha[k] - S(1);
    if (k < n) m(k, k + 1) = S(1) - family.alpha[k];
  }
  return m;
}

template <ScalarField S>
OperatorMatrix<S> nabla_star_matrix(Index n) {
  if (n < 1) throw std::invalid_argument("nabla_star_matrix: n must be >= 1");
  OperatorMatrix<S> m = OperatorMatrix<S>::Zero(n + 1, n + 1);
  const S inv_n = S(1) / scalar_from_index<S>(n);
  for (Index k = 0; k <= n; ++k) {
    if (k > 0) m(k, k - 1) = scalar_from_index<S>(n - k + 1) * inv_n;
    m(k, k) = (S(2) * scalar_from_index<S>(k) - scalar_from_index<S>(n)) * inv_n;
    if (k < n) m(k, k + 1) = -scalar_from_index<S>(k + 1) * inv_n;
  }
  return m;
}

template <ScalarField S>
OperatorMatrix<S> nabla_tilde_matrix(const BinomialParams<S>& params) {
  params.require_interior("nabla_tilde_matrix");
  const Index n = params.n;
  OperatorMatrix<S> m = OperatorMatrix<S>::Zero(n + 1, n + 1);
  const S inv_n = S(1) / scalar_from_index<S>(n);
  const S up = params.t / (S(1) - params.t);
  const S down = (S(1) - params.t) / params.t;
  for (Index k = 0; k <= n; ++k) {
    if (k > 0) m(k, k - 1) = scalar_from_index<S>(k) * down * inv_n;
    m(k, k) = (S(2) * scalar_from_index<S>(k) - scalar_from_index<S>(n)) * inv_n;
    if (k < n) m(k, k + 1) = -scalar_from_index<S>(n - k) * up * inv_n;
  }
  return m;
}

// diag(b_{n,t}) and its inverse (the inverse needs interior t so that every
// b(k) is strictly positive).
template <ScalarField S>
OperatorMatrix<S> weight_diagonal(const BinomialParams<S>& params) {
  const WeightVector<S> b = binomial_pmf(params);
  OperatorMatrix<S> m = OperatorMatrix<S>::Zero(params.n + 1, params.n + 1);
  for (Index k = 0; k <= params.n; ++k) m(k, k) = b.values[k];
  return m;
}

template <ScalarField S>
OperatorMatrix<S> weight_diagonal_inverse(const BinomialParams<S>& params) {
  params.require_interior("weight_diagonal_inverse");
  const WeightVector<S> b = binomial_pmf(params);
  OperatorMatrix<S> m = OperatorMatrix<S>::Zero(params.n + 1, params.n + 1);
  for (Index k = 0; k <= params.n; ++k) m(k, k) = S(1) / b.values[k];
  return m;
}

// Matrix of nabla_tilde . nabla_n, the operator whose spectrum the spectral
// module studies.
template <ScalarField S>
OperatorMatrix<S> composition_matrix(const BinomialParams<S>& params) {
  OperatorMatrix<S> m = nabla_tilde_matrix(params) * nabla_n_matrix<S>(params.n);
  return m;
}

// ---------------------------------------------------------------------------
// Tagged access for the CLI and dump tools.

enum class OperatorTag {
  NablaN,
  NablaStar,
  NablaTilde,
  AlphaDerivative,
  WeightDiag,
  WeightDiagInverse,
  Composition
};

inline OperatorTag parse_operator_tag(const std::string& name) {
  if (name == "nabla_n") return OperatorTag::NablaN;
  if (name == "nabla_star") return OperatorTag::NablaStar;
  if (name == "nabla_tilde") return OperatorTag::NablaTilde;
  if (name == "alpha_derivative") return OperatorTag::AlphaDerivative;
  if (name == "D") return OperatorTag::WeightDiag;
  if (name == "D_inverse") return OperatorTag::WeightDiagInverse;
  if (name == "composition") return OperatorTag::Composition;
  throw std::invalid_argument(
      "unknown operator '" + name +
      "' (expected nabla_n | nabla_star | nabla_tilde | alpha_derivative | D | "
      "D_inverse | composition)");
}

// Returns the dense matrix of the tagged operator.  `family` is consulted
// only for AlphaDerivative and must be non-null there.
template <ScalarField S>
OperatorMatrix<S> matrix_of(OperatorTag tag, const BinomialParams<S>& params,
                            const DerivativeFamily<S>* family = nullptr) {
  switch (tag) {
    case OperatorTag::NablaN:
      return nabla_n_matrix<S>(params.n);
    case OperatorTag::NablaStar:
      return nabla_star_matrix<S>(params.n);
    case OperatorTag::NablaTilde:
      return nabla_tilde_matrix(params);
    case OperatorTag::AlphaDerivative:
      if (family == nullptr)
        throw std::invalid_argument("matrix_of: alpha_derivative needs a family");
      if (family->n() != params.n)
        throw std::invalid_argument("matrix_of: family size does not match n");
      return alpha_derivative_matrix(*family);
    case OperatorTag::WeightDiag:
      return weight_diagonal(params);
    case OperatorTag::WeightDiagInverse:
      return weight_diagonal_inverse(params);
    case OperatorTag::Composition:
      return composition_matrix(params);
  }
  throw std::logic_error("matrix_of: unhandled tag");
}

}  // namespace nablan
