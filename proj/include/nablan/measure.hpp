// SPDX-License-Identifier: MIT
//
// The binomial measure b_{n,t}(k) = C(n,k) t^k (1-t)^{n-k} on {0,...,n} and
// the inner products / moment functionals built on it.
//
// Float pmf values are generated by the mode-anchored multiplicative
// recurrence b(k+1)/b(k) = ((n-k)/(k+1)) * (t/(1-t)): the anchor is the
// mode (whose value never underflows, since the max of n+1 probabilities is
// >= 1/(n+1)) and the recurrence walks outward, which keeps every entry
// accurate to a few ulp with no factorial overflow.  The rational backend
// runs the same recurrence from b(0) = (1-t)^n and is exact.

#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "nablan/scalar.hpp"
#include "nablan/types.hpp"

namespace nablan {

template <ScalarField S>
WeightVector<S> binomial_pmf(const BinomialParams<S>& params) {
  const Index n = params.n;
  GridFunction<S> b = GridFunction<S>::Zero(n + 1);

  if (params.t == S(0)) {
    b[0] = S(1);
  } else if (params.t == S(1)) {
    b[n] = S(1);
  } else if constexpr (is_exact_v<S>) {
    const Rational& t = params.t;
    const Rational one_minus_t = Rational(1) - t;
    const Rational ratio = t / one_minus_t;
    b[0] = pow_int(one_minus_t, static_cast<long>(n));
    for (Index k = 0; k + 1 <= n; ++k)
      b[k + 1] = b[k] * make_rational(n - k, k + 1) * ratio;
  } else {
    const double t = params.t;
    const Index mode = std::min<Index>(n, static_cast<Index>(std::floor(t * double(n + 1))));
    double anchor = binomial_integer(static_cast<unsigned long>(n),
                                     static_cast<unsigned long>(mode))
                        .get_d();
    if (std::isfinite(anchor)) {
      anchor = (anchor * std::pow(t, double(mode))) * std::pow(1.0 - t, double(n - mode));
    }
    if (!std::isfinite(anchor) || anchor == 0.0) {
      // Very large n: assemble the anchor in log space instead.
      anchor = std::exp(std::lgamma(double(n + 1)) - std::lgamma(double(mode + 1)) -
                        std::lgamma(double(n - mode + 1)) + double(mode) * std::log(t) +
                        double(n - mode) * std::log1p(-t));
    }
    b[mode] = anchor;
    const double up = t / (1.0 - t);
    for (Index k = mode; k + 1 <= n; ++k)
      b[k + 1] = b[k] * (double(n - k) / double(k + 1)) * up;
    for (Index k = mode; k >= 1; --k)
      b[k - 1] = b[k] * (double(k) / double(n - k + 1)) / up;
  }

  return WeightVector<S>::probability_weights(std::move(b));
}

// ---------------------------------------------------------------------------
// Inner products.  sum_k f(k) g(k) and sum_k f(k) g(k) w(k); the float
// instantiation accumulates with compensation.

template <ScalarField S>
S inner_unweighted(const GridFunction<S>& f, const GridFunction<S>& g) {
  require_same_length(f, g, "inner_unweighted");
  Accumulator<S> acc;
  for (Index k = 0; k < f.size(); ++k) acc.add(f[k] * g[k]);
  return acc.total();
}

template <ScalarField S>
S inner_weighted(const GridFunction<S>& f, const GridFunction<S>& g,
                 const WeightVector<S>& w) {
  require_same_length(f, g, "inner_weighted");
  require_same_length(f, w.values, "inner_weighted");
  Accumulator<S> acc;
  for (Index k = 0; k < f.size(); ++k) acc.add(f[k] * g[k] * w.values[k]);
  return acc.total();
}

// Mean and variance of f under a probability weight (two-pass variance).
template <ScalarField S>
std::pair<S, S> mean_variance(const GridFunction<S>& f, const WeightVector<S>& w) {
  require_same_length(f, w.values, "mean_variance");
  if (!w.probability)
    throw std::invalid_argument("mean_variance: weight must be a probability vector");
  Accumulator<S> m_acc;
  for (Index k = 0; k < f.size(); ++k) m_acc.add(f[k] * w.values[k]);
  const S mean = m_acc.total();
  Accumulator<S> v_acc;
  for (Index k = 0; k < f.size(); ++k) {
    const S d = f[k] - mean;
    v_acc.add(d * d * w.values[k]);
  }
  return {mean, v_acc.total()};
}

// ---------------------------------------------------------------------------
// Entropy functional Ent_w(f) = sum Theta(f) w - Theta(sum f w) with
// Theta(x) = x ln x (natural log, Theta(0) = 0).  Needs transcendental
// functions, hence float-only.

inline double entropy_functional(const GridFunction<double>& f,
                                 const WeightVector<double>& w) {
  require_same_length(f, w.values, "entropy_functional");
  if (!w.probability)
    throw std::invalid_argument("entropy_functional: weight must be a probability vector");
  const auto theta = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
  Accumulator<double> lhs, mean;
  for (Index k = 0; k < f.size(); ++k) {
    if (f[k] < 0.0)
      throw std::domain_error("entropy_functional: f must be nonnegative");
    lhs.add(theta(f[k]) * w.values[k]);
    mean.add(f[k] * w.values[k]);
  }
  return lhs.total() - theta(mean.total());
}

// ---------------------------------------------------------------------------
// d/dt b_{n,t}(k) = b_{n,t}(k) * (k - n t) / (t (1 - t)); defined for
// interior t only.

template <ScalarField S>
GridFunction<S> pmf_time_derivative(const BinomialParams<S>& params) {
  params.require_interior("pmf_time_derivative");
  const WeightVector<S> b = binomial_pmf(params);
  const S nt = scalar_from_index<S>(params.n) * params.t;
  const S denom = params.t * (S(1) - params.t);
  GridFunction<S> d(params.n + 1);
  for (Index k = 0; k <= params.n; ++k)
    d[k] = b.values[k] * (scalar_from_index<S>(k) - nt) / denom;
  return d;
}

}  // namespace nablan
