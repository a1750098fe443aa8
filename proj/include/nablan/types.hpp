// SPDX-License-Identifier: MIT
//
// Grid-level value types shared by every module: functions on the integer
// grid {0,...,n}, dense operator matrices, the (n, t) parameter pack of the
// binomial measure, and tagged weight vectors.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "nablan/scalar.hpp"

namespace nablan {

// f: {0,...,n} -> S stored densely; coefficient k is the value at grid
// point k, so the length is n + 1.
template <ScalarField S>
using GridFunction = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Dense (n+1) x (n+1) matrix of a linear operator on grid functions.
template <ScalarField S>
using OperatorMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// Parameters of the binomial measure b_{n,t}.

template <ScalarField S>
struct BinomialParams {
  Index n;
  S t;

  BinomialParams(Index n_, S t_) : n(n_), t(std::move(t_)) {
    if (n < 1) throw std::invalid_argument("BinomialParams: n must be >= 1");
    if (t < S(0) || t > S(1))
      throw std::invalid_argument("BinomialParams: t must lie in [0, 1]");
  }

  // True when t avoids the degenerate endpoints {0, 1}.
  bool interior() const { return t > S(0) && t < S(1); }

  void require_interior(const char* what) const {
    if (!interior())
      throw std::invalid_argument(std::string(what) + ": requires t in (0, 1)");
  }

  Index size() const { return n + 1; }
};

// ---------------------------------------------------------------------------
// Weight vectors carry validation state so downstream code can demand
// nonnegativity or unit mass without re-checking.

inline constexpr double kProbabilitySumTol = 1e-12;

template <ScalarField S>
struct WeightVector {
  GridFunction<S> values;
  bool nonnegative = false;
  bool probability = false;

  Index n() const { return values.size() - 1; }
  const S& operator[](Index k) const { return values[k]; }

  static WeightVector raw(GridFunction<S> v) {
    check_size(v);
    return WeightVector{std::move(v), false, false};
  }

  static WeightVector nonnegative_weights(GridFunction<S> v) {
    check_size(v);
    for (Index k = 0; k < v.size(); ++k)
      if (v[k] < S(0))
        throw std::invalid_argument("WeightVector: negative entry at k=" +
                                    std::to_string(k));
    return WeightVector{std::move(v), true, false};
  }

  // Nonnegative and unit total mass (exactly in the rational field, within
  // kProbabilitySumTol in float).
  static WeightVector probability_weights(GridFunction<S> v) {
    WeightVector w = nonnegative_weights(std::move(v));
    Accumulator<S> acc;
    for (Index k = 0; k < w.values.size(); ++k) acc.add(w.values[k]);
    const S mass = acc.total();
    if constexpr (is_exact_v<S>) {
      if (mass != S(1))
        throw std::invalid_argument("WeightVector: mass " + scalar_repr(mass) +
                                    " != 1");
    } else {
      if (std::abs(mass - 1.0) > kProbabilitySumTol)
        throw std::invalid_argument("WeightVector: mass deviates from 1 by " +
                                    scalar_repr(mass - 1.0));
    }
    w.probability = true;
    return w;
  }

 private:
  static void check_size(const GridFunction<S>& v) {
    if (v.size() < 2)
      throw std::invalid_argument("WeightVector: need at least two grid points");
  }
};

// ---------------------------------------------------------------------------
// Small constructors used all over the tests and the CLI.

template <ScalarField S>
GridFunction<S> constant_function(Index n, const S& c) {
  return GridFunction<S>::Constant(n + 1, c);
}

// The coordinate function k |-> k.
template <ScalarField S>
GridFunction<S> identity_function(Index n) {
  GridFunction<S> f(n + 1);
  for (Index k = 0; k <= n; ++k) f[k] = scalar_from_index<S>(k);
  return f;
}

template <ScalarField S>
GridFunction<S> delta_function(Index n, Index j) {
  if (j < 0 || j > n)
    throw std::invalid_argument("delta_function: site outside {0,...,n}");
  GridFunction<S> f = GridFunction<S>::Zero(n + 1);
  f[j] = S(1);
  return f;
}

template <ScalarField S>
void require_same_length(const GridFunction<S>& f, const GridFunction<S>& g,
                         const char* what) {
  if (f.size() != g.size())
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(f.size()) + " vs " +
                                std::to_string(g.size()) + ")");
}

}  // namespace nablan
