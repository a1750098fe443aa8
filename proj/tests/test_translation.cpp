// SPDX-License-Identifier: MIT
//
// Oracles used below (computed independently of the implementation):
//  - matrix_exponential is cross-checked against a classical fixed-step RK4
//    integrator of X' = AX, X(0) = I, written directly in this file (global
//    error ~ h^4 ~ 1e-13 at 2000 steps for the matrices used, far below the
//    1e-9 gate).
//  - diag(a, b) exponentiates to diag(e^a, e^b); the nilpotent [[0,1],[0,0]]
//    to [[1,s],[0,1]] -- both by hand.
//  - Column sums of the generator equal alpha_0 at column 0, zero at interior
//    columns, alpha_n - 1 at column n (row sums of the derivative matrix), so
//    mass is conserved iff alpha_0 = 0 and alpha_n = 1.
//  - For the canonical family the path is t -> b_{n,t} (checked against the
//    independent pmf) and X(1) = e_n.
//  - E_{b_t}[f] is a polynomial in t, so the centered difference of it is
//    second-order: deviation(h)/deviation(h/2) ~ 4.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nablan/spectral.hpp>  // detail::uniform01 for reproducible fills
#include <nablan/translation.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace nablan;

namespace {

// Independent oracle: classical RK4 for X' = AX, X(0) = I.
OperatorMatrix<double> rk4_exponential(const OperatorMatrix<double>& a, double s,
                                       int steps) {
  OperatorMatrix<double> x = OperatorMatrix<double>::Identity(a.rows(), a.cols());
  const double h = s / double(steps);
  for (int i = 0; i < steps; ++i) {
    const OperatorMatrix<double> k1 = a * x;
    const OperatorMatrix<double> k2 = a * (x + 0.5 * h * k1);
    const OperatorMatrix<double> k3 = a * (x + 0.5 * h * k2);
    const OperatorMatrix<double> k4 = a * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace

TEST_CASE("matrix exponential: hand cases and the RK4 oracle") {
  OperatorMatrix<double> d = OperatorMatrix<double>::Zero(2, 2);
  d(0, 0) = -0.7;
  d(1, 1) = 1.3;
  const auto ed = matrix_exponential(d, 1.0);
  CHECK(ed(0, 0) == doctest::Approx(std::exp(-0.7)).epsilon(1e-14));
  CHECK(ed(1, 1) == doctest::Approx(std::exp(1.3)).epsilon(1e-14));
  CHECK(ed(0, 1) == 0.0);
  CHECK(ed(1, 0) == 0.0);

  OperatorMatrix<double> nil = OperatorMatrix<double>::Zero(2, 2);
  nil(0, 1) = 1.0;
  const auto en = matrix_exponential(nil, 2.5);
  CHECK(en(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(en(0, 1) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(en(1, 0) == 0.0);
  CHECK(en(1, 1) == doctest::Approx(1.0).epsilon(1e-15));

  // s = 0 gives the identity exactly.
  const auto e0 = matrix_exponential(nil, 0.0);
  CHECK(e0 == OperatorMatrix<double>::Identity(2, 2));

  std::mt19937_64 rng(67);
  OperatorMatrix<double> a(5, 5);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j)
      a(i, j) = 2.0 * detail::uniform01(rng) - 1.0;
  const auto fast = matrix_exponential(a, 1.0);
  const auto slow = rk4_exponential(a, 1.0, 2000);
  CHECK((fast - slow).cwiseAbs().maxCoeff() <= 1e-9);

  // exp(A) exp(-A) = I.
  const auto inv = matrix_exponential(a, -1.0);
  CHECK((fast * inv - OperatorMatrix<double>::Identity(5, 5)).cwiseAbs().maxCoeff() <=
        1e-13);

  OperatorMatrix<double> rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(matrix_exponential(rect, 1.0), std::invalid_argument);
  OperatorMatrix<double> bad = OperatorMatrix<double>::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(matrix_exponential(bad, 1.0), std::invalid_argument);
}

TEST_CASE("canonical generator is exactly the nabla_star matrix") {
  for (long n : {1L, 2L, 6L, 13L}) {
    const auto family = DerivativeFamily<Rational>::canonical(n);
    CHECK(generator_matrix(family) == nabla_star_matrix<Rational>(n));
  }
}

TEST_CASE("generator column sums expose the boundary mass balance") {
  const long n = 5;
  const auto check_sums = [&](const DerivativeFamily<Rational>& family) {
    const OperatorMatrix<Rational> a = generator_matrix(family);
    for (Index j = 0; j <= n; ++j) {
      Rational sum(0);
      for (Index i = 0; i <= n; ++i) sum += a(i, j);
      Rational expected(0);
      if (j == 0) expected = family.alpha[0];
      if (j == n) expected = family.alpha[n] - Rational(1);
      CHECK(sum == expected);
    }
  };
  check_sums(DerivativeFamily<Rational>::canonical(n));
  check_sums(DerivativeFamily<Rational>::constant(n, make_rational(1, 2)));
  check_sums(DerivativeFamily<Rational>::left(n));
  check_sums(DerivativeFamily<Rational>::right(n));
}

TEST_CASE("canonical evolution traces the binomial pmf") {
  const long n = 6;
  const auto family = DerivativeFamily<double>::canonical(n);

  const auto start = evolve(family, 0.0);
  for (Index k = 0; k <= n; ++k) CHECK(start[k] == (k == 0 ? 1.0 : 0.0));

  for (double t : {0.2, 0.5, 0.9}) {
    const auto state = evolve(family, t);
    const auto b = binomial_pmf(BinomialParams<double>(n, t));
    for (Index k = 0; k <= n; ++k)
      CHECK(std::abs(state[k] - b.values[k]) <= 1e-12);
  }

  const auto end = evolve(family, 1.0);
  CHECK(std::abs(end[n] - 1.0) <= 1e-10);
  for (Index k = 0; k < n; ++k) CHECK(std::abs(end[k]) <= 1e-10);

  // Semigroup property in the time parameter.
  const OperatorMatrix<double> a = generator_matrix(family);
  const auto half = matrix_exponential(a, double(n) * 0.35);
  const auto rest = matrix_exponential(a, double(n) * 0.40);
  const auto whole = matrix_exponential(a, double(n) * 0.75);
  CHECK((half * rest - whole).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("is_fundamental_solution separates the canonical family from others") {
  const auto grid = uniform_time_grid(21);
  CHECK(grid.size() == 21);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(grid[5] == doctest::Approx(0.25).epsilon(1e-15));

  const auto good = is_fundamental_solution(DerivativeFamily<double>::canonical(5), grid);
  CHECK(good.fundamental_flag);
  CHECK(good.min_entry >= -kNegativityTol);
  CHECK(good.final_residual <= kFinalResidualTol);
  CHECK(good.max_mass_drift <= 1e-12);
  CHECK(good.states.rows() == 6);
  CHECK(good.states.cols() == 21);

  const auto right = is_fundamental_solution(DerivativeFamily<double>::right(5), grid);
  CHECK(!right.fundamental_flag);
  CHECK(right.final_residual > 1e-3);

  const auto half =
      is_fundamental_solution(DerivativeFamily<double>::constant(5, 0.5), grid);
  CHECK(!half.fundamental_flag);
  CHECK(half.max_mass_drift > 1e-3);

  CHECK_THROWS_AS(is_fundamental_solution(DerivativeFamily<double>::canonical(3), {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      is_fundamental_solution(DerivativeFamily<double>::canonical(3), {0.0, 0.5}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      is_fundamental_solution(DerivativeFamily<double>::canonical(3), {-0.1, 0.5, 1.0}),
      std::invalid_argument);
  CHECK_THROWS_AS(uniform_time_grid(1), std::invalid_argument);
}

TEST_CASE("necessary conditions alpha_0 = 0, alpha_n = 1") {
  CHECK(necessary_conditions(DerivativeFamily<Rational>::canonical(4)).ok);

  const auto left = necessary_conditions(DerivativeFamily<Rational>::left(4));
  CHECK(!left.ok);
  REQUIRE(left.violations.size() == 1);
  CHECK(left.violations[0].find("alpha_0") != std::string::npos);
  CHECK(left.violations[0].find("below") != std::string::npos);

  const auto right = necessary_conditions(DerivativeFamily<Rational>::right(4));
  CHECK(!right.ok);
  REQUIRE(right.violations.size() == 1);
  CHECK(right.violations[0].find("alpha_n") != std::string::npos);
  CHECK(right.violations[0].find("above") != std::string::npos);

  const auto half =
      necessary_conditions(DerivativeFamily<Rational>::constant(4, make_rational(1, 2)));
  CHECK(!half.ok);
  CHECK(half.violations.size() == 2);

  // Wild interior values are fine as long as the endpoints are pinned.
  const auto wild = necessary_conditions(family_from_spec<Rational>(3, "values:0,1,0,1"));
  CHECK(wild.ok);
}

TEST_CASE("transport identity: exact equality and second-order finite difference") {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<long> num(-9, 9);
  std::uniform_int_distribution<long> den(1, 9);
  for (auto [n, tn, td] : {std::tuple{2L, 1L, 2L}, {5L, 2L, 7L}, {9L, 3L, 4L}}) {
    const BinomialParams<Rational> params(n, make_rational(tn, td));
    for (int rep = 0; rep < 10; ++rep) {
      GridFunction<Rational> f(n + 1);
      for (Index k = 0; k <= n; ++k) f[k] = make_rational(num(rng), den(rng));
      const auto [lhs, rhs] = transport_identity_exact(f, params);
      CHECK(lhs == rhs);
    }
  }

  const BinomialParams<double> params(6, 0.4);
  GridFunction<double> f(7);
  for (Index k = 0; k <= 6; ++k) f[k] = 2.0 * detail::uniform01(rng) - 1.0;
  const auto coarse = transport_identity_check(f, params, 1e-2);
  const auto fine = transport_identity_check(f, params, 5e-3);
  CHECK(coarse.deviation / fine.deviation == doctest::Approx(4.0).epsilon(0.125));
  CHECK(fine.deviation <= 1e-4);

  CHECK_THROWS_AS(transport_identity_check(f, params, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(transport_identity_check(f, params, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(transport_identity_check(identity_function<double>(3), params, 1e-3),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      transport_identity_exact(identity_function<Rational>(3),
                               BinomialParams<Rational>(4, make_rational(1, 2))),
      std::invalid_argument);
}

TEST_CASE("support confinement distinguishes conservative families") {
  const std::vector<double> grid{0.0, 0.3, 0.7, 1.0};

  const auto good =
      support_confinement_check(DerivativeFamily<double>::canonical(4), grid, 3);
  CHECK(good.confined);
  CHECK(good.max_exterior_mass <= kExteriorMassTol);

  const auto leaky =
      support_confinement_check(DerivativeFamily<double>::constant(4, 0.5), grid, 3);
  CHECK(!leaky.confined);
  CHECK(leaky.max_exterior_mass > 1e-3);

  // margin = 0: no exterior sites, trivially confined.
  const auto trivial =
      support_confinement_check(DerivativeFamily<double>::constant(4, 0.5), grid, 0);
  CHECK(trivial.confined);
  CHECK(trivial.max_exterior_mass == 0.0);

  CHECK_THROWS_AS(support_confinement_check(DerivativeFamily<double>::canonical(3),
                                            {0.0, 1.5}, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      support_confinement_check(DerivativeFamily<double>::canonical(3), grid, -1),
      std::invalid_argument);
}
