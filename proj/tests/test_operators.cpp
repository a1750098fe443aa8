// SPDX-License-Identifier: MIT
//
// Oracles used below (computed independently of the implementation):
//  - nabla_right(1,1,1) = (0,0,-1) and nabla_left(0,1,2,3) = (0,1,1,1) by
//    hand from the difference definitions with zero padding.
//  - nabla_n matrix at n = 2, rows (-1,1,0), (-1/2,0,1/2), (0,-1,1) from the
//    stencil -k/n, (2k-n)/n, (n-k)/n.
//  - nabla_star matrix at n = 2, rows (-1,-1/2,0), (1,0,-1), (0,1/2,1) from
//    the stencil (n-k+1)/n, (2k-n)/n, -(k+1)/n; hence nabla_star delta_0 =
//    (-1,1,0).
//  - At (n,t) = (2,1/2): phi_1 = (k-nt)/(1-t) = (-2,0,2) and
//    nabla_n phi_1 = (2,2,2) by direct evaluation of the stencil.
//  - Score identity n (nabla_star b)(k) / b(k) = k/t - (n-k)/(1-t) and
//    n (nabla_tilde 1)(k) = k/t - (n-k)/(1-t): both re-derived with exact
//    rational arithmetic in an independent script for (2,1/2), (3,1/3),
//    (5,2/5), (7,3/4) before being frozen here.
//  - nabla_tilde(ones) at (2,1/2) = (-2,0,2): (4k-2n)/n at t = 1/2.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nablan/operators.hpp>

#include <random>
#include <stdexcept>

using namespace nablan;

namespace {

template <ScalarField S>
BinomialParams<S> params_of(long n, long num, long den) {
  if constexpr (is_exact_v<S>)
    return BinomialParams<S>(n, make_rational(num, den));
  else
    return BinomialParams<S>(n, double(num) / double(den));
}

GridFunction<Rational> random_rational_vector(Index size, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(-9, 9);
  std::uniform_int_distribution<long> den(1, 9);
  GridFunction<Rational> f(size);
  for (Index k = 0; k < size; ++k) f[k] = make_rational(num(rng), den(rng));
  return f;
}

GridFunction<Rational> grid3(long a, long b, long c) {
  GridFunction<Rational> f(3);
  f << Rational(a), Rational(b), Rational(c);
  return f;
}

}  // namespace

TEST_CASE("one-sided differences match hand values and telescope") {
  const auto r = nabla_right(grid3(1, 1, 1));
  CHECK(r[0] == Rational(0));
  CHECK(r[1] == Rational(0));
  CHECK(r[2] == Rational(-1));

  GridFunction<Rational> ramp(4);
  ramp << Rational(0), Rational(1), Rational(2), Rational(3);
  const auto l = nabla_left(ramp);
  for (Index k = 0; k <= 3; ++k) CHECK(l[k] == Rational(k == 0 ? 0 : 1));

  // Telescoping: sum_k nabla_left f(k) = f(n) because f(-1) = 0.
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto f = random_rational_vector(7, rng);
    const auto d = nabla_left(f);
    Rational total(0);
    for (Index k = 0; k < d.size(); ++k) total += d[k];
    CHECK(total == f[6]);
  }
}

TEST_CASE("nabla_n annihilates constants and maps identity to ones") {
  for (long n : {1L, 2L, 5L, 13L}) {
    const auto zero = nabla_n(constant_function<Rational>(n, make_rational(7, 3)));
    const auto ones = nabla_n(identity_function<Rational>(n));
    for (Index k = 0; k <= n; ++k) {
      CHECK(zero[k] == Rational(0));
      CHECK(ones[k] == Rational(1));
    }
  }
}

TEST_CASE("nabla_n on phi_1 at (2,1/2) matches the hand oracle") {
  const auto g = nabla_n(grid3(-2, 0, 2));
  for (Index k = 0; k <= 2; ++k) CHECK(g[k] == Rational(2));
}

TEST_CASE("alpha family reproduces the canonical and one-sided operators") {
  std::mt19937_64 rng(5);
  for (long n : {2L, 6L}) {
    const auto canonical = DerivativeFamily<Rational>::canonical(n);
    const auto left = DerivativeFamily<Rational>::left(n);
    const auto right = DerivativeFamily<Rational>::right(n);
    for (int rep = 0; rep < 10; ++rep) {
      const auto f = random_rational_vector(n + 1, rng);
      CHECK(alpha_derivative(canonical, f) == nabla_n(f));
      CHECK(alpha_derivative(left, f) == nabla_left(f));
      CHECK(alpha_derivative(right, f) == nabla_right(f));
    }
  }
}

TEST_CASE("family_from_spec parses every form and validates counts") {
  const auto c = family_from_spec<Rational>(3, "const:1/2");
  for (Index k = 0; k <= 3; ++k) CHECK(c.alpha[k] == make_rational(1, 2));

  const auto v = family_from_spec<Rational>(2, "values:0,1/2,1");
  CHECK(v.alpha[0] == Rational(0));
  CHECK(v.alpha[1] == make_rational(1, 2));
  CHECK(v.alpha[2] == Rational(1));

  CHECK(family_from_spec<double>(4, "canonical").alpha[2] == doctest::Approx(0.5));
  CHECK_THROWS_AS(family_from_spec<Rational>(2, "values:0,1"), std::invalid_argument);
  CHECK_THROWS_AS(family_from_spec<Rational>(2, "diagonal"), std::invalid_argument);
  CHECK_THROWS_AS(family_from_spec<Rational>(2, "const:3/2"), std::invalid_argument);
}

TEST_CASE("nabla_star matches the golden matrix and the delta example") {
  const auto m = nabla_star_matrix<Rational>(2);
  CHECK(m(0, 0) == Rational(-1));
  CHECK(m(0, 1) == make_rational(-1, 2));
  CHECK(m(0, 2) == Rational(0));
  CHECK(m(1, 0) == Rational(1));
  CHECK(m(1, 1) == Rational(0));
  CHECK(m(1, 2) == Rational(-1));
  CHECK(m(2, 0) == Rational(0));
  CHECK(m(2, 1) == make_rational(1, 2));
  CHECK(m(2, 2) == Rational(1));

  const auto d = nabla_star(delta_function<Rational>(2, 0));
  CHECK(d[0] == Rational(-1));
  CHECK(d[1] == Rational(1));
  CHECK(d[2] == Rational(0));
}

TEST_CASE("nabla_star is the unweighted adjoint of nabla_n") {
  std::mt19937_64 rng(17);
  for (long n : {1L, 2L, 4L, 9L}) {
    for (int rep = 0; rep < 25; ++rep) {
      const auto f = random_rational_vector(n + 1, rng);
      const auto g = random_rational_vector(n + 1, rng);
      CHECK(inner_unweighted<Rational>(nabla_n(f), g) ==
            inner_unweighted<Rational>(f, nabla_star(g)));
    }
  }
}

TEST_CASE("score identity: n nabla_star(b) / b equals k/t - (n-k)/(1-t)") {
  for (auto [n, num, den] :
       {std::tuple{2L, 1L, 2L}, {3L, 1L, 3L}, {5L, 2L, 5L}, {7L, 3L, 4L}}) {
    const auto params = params_of<Rational>(n, num, den);
    const auto b = binomial_pmf(params);
    const auto sb = nabla_star(b.values);
    const Rational one_minus_t = Rational(1) - params.t;
    for (Index k = 0; k <= n; ++k) {
      const Rational lhs = scalar_from_index<Rational>(n) * sb[k] / b.values[k];
      const Rational rhs = scalar_from_index<Rational>(k) / params.t -
                           scalar_from_index<Rational>(n - k) / one_minus_t;
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("nabla_tilde on constants reproduces the score, with hand values") {
  const auto params = params_of<Rational>(2, 1, 2);
  const auto g = nabla_tilde(params, constant_function<Rational>(2, Rational(1)));
  CHECK(g[0] == Rational(-2));
  CHECK(g[1] == Rational(0));
  CHECK(g[2] == Rational(2));

  for (auto [n, num, den] : {std::tuple{3L, 1L, 3L}, {5L, 2L, 5L}, {7L, 3L, 4L}}) {
    const auto p = params_of<Rational>(n, num, den);
    const auto s = nabla_tilde(p, constant_function<Rational>(n, Rational(1)));
    const Rational one_minus_t = Rational(1) - p.t;
    for (Index k = 0; k <= n; ++k) {
      const Rational rhs = scalar_from_index<Rational>(k) / p.t -
                           scalar_from_index<Rational>(n - k) / one_minus_t;
      CHECK(scalar_from_index<Rational>(n) * s[k] == rhs);
    }
  }
}

TEST_CASE("nabla_tilde is the b-weighted adjoint of nabla_n") {
  std::mt19937_64 rng(23);
  for (auto [n, num, den] : {std::tuple{1L, 1L, 4L}, {3L, 1L, 2L}, {6L, 2L, 3L}}) {
    const auto params = params_of<Rational>(n, num, den);
    const auto b = binomial_pmf(params);
    for (int rep = 0; rep < 25; ++rep) {
      const auto f = random_rational_vector(n + 1, rng);
      const auto g = random_rational_vector(n + 1, rng);
      CHECK(inner_weighted<Rational>(nabla_n(f), g, b) ==
            inner_weighted<Rational>(f, nabla_tilde(params, g), b));
    }
  }
}

TEST_CASE("conjugation: nabla_tilde = D^{-1} nabla_n^T D exactly") {
  for (long n : {1L, 2L, 5L, 11L, 20L}) {
    for (auto [num, den] : {std::pair{1L, 4L}, {1L, 3L}, {1L, 2L}, {2L, 3L}}) {
      const auto params = params_of<Rational>(n, num, den);
      const OperatorMatrix<Rational> lhs = nabla_tilde_matrix(params);
      const OperatorMatrix<Rational> rhs = weight_diagonal_inverse(params) *
                                           nabla_n_matrix<Rational>(n).transpose() *
                                           weight_diagonal(params);
      CHECK(lhs == rhs);
    }
  }
}

TEST_CASE("matrix realizations agree with the pointwise operators") {
  std::mt19937_64 rng(31);
  const auto params = params_of<Rational>(6, 1, 3);
  const auto family = DerivativeFamily<Rational>::constant(6, make_rational(2, 5));
  const OperatorMatrix<Rational> mn = nabla_n_matrix<Rational>(6);
  const OperatorMatrix<Rational> ms = nabla_star_matrix<Rational>(6);
  const OperatorMatrix<Rational> mt = nabla_tilde_matrix(params);
  const OperatorMatrix<Rational> ma = alpha_derivative_matrix(family);
  // Basis vectors exercise every column; random vectors exercise linearity.
  for (Index j = 0; j <= 6; ++j) {
    const auto e = delta_function<Rational>(6, j);
    CHECK(GridFunction<Rational>(mn * e) == nabla_n(e));
    CHECK(GridFunction<Rational>(ms * e) == nabla_star(e));
    CHECK(GridFunction<Rational>(mt * e) == nabla_tilde(params, e));
    CHECK(GridFunction<Rational>(ma * e) == alpha_derivative(family, e));
  }
  for (int rep = 0; rep < 10; ++rep) {
    const auto f = random_rational_vector(7, rng);
    CHECK(GridFunction<Rational>(mn * f) == nabla_n(f));
    CHECK(GridFunction<Rational>(ms * f) == nabla_star(f));
    CHECK(GridFunction<Rational>(mt * f) == nabla_tilde(params, f));
    CHECK(GridFunction<Rational>(ma * f) == alpha_derivative(family, f));
  }
}

TEST_CASE("structural matrix identities") {
  for (long n : {1L, 2L, 7L, 15L}) {
    const OperatorMatrix<Rational> mn = nabla_n_matrix<Rational>(n);
    const OperatorMatrix<Rational> ms = nabla_star_matrix<Rational>(n);
    CHECK(OperatorMatrix<Rational>(mn.transpose()) == ms);
    for (Index i = 0; i <= n; ++i) {
      Rational row_sum(0);
      for (Index j = 0; j <= n; ++j) {
        row_sum += mn(i, j);
        if (j > i + 1 || i > j + 1) {
          CHECK(mn(i, j) == Rational(0));
          CHECK(ms(i, j) == Rational(0));
        }
      }
      CHECK(row_sum == Rational(0));  // nabla_n annihilates constants.
    }
  }
}

TEST_CASE("D-weighted composition is symmetric: b_i L(i,j) = b_j L(j,i)") {
  for (auto [n, num, den] : {std::tuple{3L, 1L, 2L}, {8L, 1L, 4L}, {12L, 2L, 3L}}) {
    const auto params = params_of<Rational>(n, num, den);
    const auto b = binomial_pmf(params);
    const OperatorMatrix<Rational> comp = composition_matrix(params);
    for (Index i = 0; i <= n; ++i)
      for (Index j = 0; j <= n; ++j)
        CHECK(b.values[i] * comp(i, j) == b.values[j] * comp(j, i));
  }
}

TEST_CASE("matrix_of dispatches every tag") {
  const auto params = params_of<Rational>(4, 1, 2);
  const auto family = DerivativeFamily<Rational>::canonical(4);
  CHECK(matrix_of(parse_operator_tag("nabla_n"), params) ==
        nabla_n_matrix<Rational>(4));
  CHECK(matrix_of(parse_operator_tag("nabla_star"), params) ==
        nabla_star_matrix<Rational>(4));
  CHECK(matrix_of(parse_operator_tag("nabla_tilde"), params) ==
        nabla_tilde_matrix(params));
  CHECK(matrix_of(parse_operator_tag("alpha_derivative"), params, &family) ==
        alpha_derivative_matrix(family));
  CHECK(matrix_of(parse_operator_tag("D"), params) == weight_diagonal(params));
  CHECK(matrix_of(parse_operator_tag("D_inverse"), params) ==
        weight_diagonal_inverse(params));
  CHECK(matrix_of(parse_operator_tag("composition"), params) ==
        composition_matrix(params));
}

TEST_CASE("float and exact backends agree on a midsize problem") {
  const long n = 30;
  std::mt19937_64 rng(41);
  auto fq = random_rational_vector(n + 1, rng);
  GridFunction<double> fd(n + 1);
  for (Index k = 0; k <= n; ++k) fd[k] = to_double(fq[k]);
  const auto params_q = params_of<Rational>(n, 1, 3);
  const auto params_d = params_of<double>(n, 1, 3);
  const auto gq = nabla_tilde(params_q, nabla_n(fq));
  const auto gd = nabla_tilde(params_d, nabla_n(fd));
  for (Index k = 0; k <= n; ++k)
    CHECK(gd[k] == doctest::Approx(to_double(gq[k])).epsilon(1e-12));
}

TEST_CASE("error paths") {
  GridFunction<Rational> tiny(1);
  tiny << Rational(1);
  CHECK_THROWS_AS(nabla_n(tiny), std::invalid_argument);
  CHECK_THROWS_AS(nabla_right(tiny), std::invalid_argument);
  CHECK_THROWS_AS(nabla_left(tiny), std::invalid_argument);
  CHECK_THROWS_AS(nabla_star(tiny), std::invalid_argument);

  GridFunction<Rational> bad_alpha(3);
  bad_alpha << Rational(0), make_rational(3, 2), Rational(1);
  CHECK_THROWS_AS(DerivativeFamily<Rational>{bad_alpha}, std::invalid_argument);
  GridFunction<Rational> neg_alpha(2);
  neg_alpha << Rational(0), Rational(-1);
  CHECK_THROWS_AS(DerivativeFamily<Rational>{neg_alpha}, std::invalid_argument);

  const auto family = DerivativeFamily<Rational>::canonical(3);
  CHECK_THROWS_AS(alpha_derivative(family, grid3(1, 2, 3)), std::invalid_argument);

  const auto boundary = BinomialParams<Rational>(3, Rational(0));
  CHECK_THROWS_AS(nabla_tilde(boundary, identity_function<Rational>(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(nabla_tilde_matrix(boundary), std::invalid_argument);
  CHECK_THROWS_AS(weight_diagonal_inverse(boundary), std::invalid_argument);

  const auto params = params_of<Rational>(3, 1, 2);
  CHECK_THROWS_AS(nabla_tilde(params, grid3(1, 2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(matrix_of(OperatorTag::AlphaDerivative, params),
                  std::invalid_argument);
  const auto small_family = DerivativeFamily<Rational>::canonical(2);
  CHECK_THROWS_AS(matrix_of(OperatorTag::AlphaDerivative, params, &small_family),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_operator_tag("laplacian"), std::invalid_argument);
  CHECK_THROWS_AS(nabla_n_matrix<Rational>(0), std::invalid_argument);
  CHECK_THROWS_AS(delta_function<Rational>(3, 4), std::invalid_argument);
}
