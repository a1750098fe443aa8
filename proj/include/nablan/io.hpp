// SPDX-License-Identifier: MIT
//
// Serialization: the CSV layouts consumed by the CLI's --format csv and the
// JSON report builders for --format json.  Exact scalars render as "p/q"
// strings (JSON numbers cannot hold them); doubles render with %.17g and
// round-trip.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nablan/krawtchouk.hpp"
#include "nablan/scalar.hpp"
#include "nablan/spectral.hpp"
#include "nablan/translation.hpp"
#include "nablan/types.hpp"

namespace nablan {

using nlohmann::json;

// JSON value for a scalar: number for double, "p/q" string for rationals.
inline json scalar_json(double x) { return json(x); }
inline json scalar_json(const Rational& q) { return json(scalar_repr(q)); }

// ---------------------------------------------------------------------------
// CSV writers.  One layout per shape, headers always present.

template <ScalarField S>
void write_grid_csv(std::ostream& os, const GridFunction<S>& f) {
  os << "k,value\n";
  for (Index k = 0; k < f.size(); ++k) os << k << ',' << scalar_repr(f[k]) << '\n';
}

template <ScalarField S>
void write_matrix_csv(std::ostream& os, const OperatorMatrix<S>& m) {
  os << "i,j,value\n";
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      os << i << ',' << j << ',' << scalar_repr(m(i, j)) << '\n';
}

template <ScalarField S>
void write_basis_csv(std::ostream& os, const KrawtchoukBasis<S>& basis) {
  os << "r,k,value\n";
  for (Index r = 0; r <= basis.n(); ++r)
    for (Index k = 0; k <= basis.n(); ++k)
      os << r << ',' << k << ',' << scalar_repr(basis.values(r, k)) << '\n';
}

template <ScalarField S>
void write_norms_csv(std::ostream& os, const KrawtchoukBasis<S>& basis) {
  os << "r,C\n";
  for (Index r = 0; r <= basis.n(); ++r)
    os << r << ',' << scalar_repr(basis.norms[r]) << '\n';
}

inline void write_path_csv(std::ostream& os, const TranslationPath& path) {
  os << "t,k,mass\n";
  for (std::size_t j = 0; j < path.times.size(); ++j)
    for (Index k = 0; k < path.states.rows(); ++k)
      os << scalar_repr(path.times[j]) << ',' << k << ','
         << scalar_repr(path.states(k, static_cast<Index>(j))) << '\n';
}

inline void write_poisson_csv(std::ostream& os, const std::vector<PoissonLimitRow>& rows) {
  os << "n,t,binomial_constant,poisson_constant,gap\n";
  for (const PoissonLimitRow& row : rows)
    os << row.n << ',' << scalar_repr(row.t) << ',' << scalar_repr(row.binomial_constant)
       << ',' << scalar_repr(row.poisson_constant) << ',' << scalar_repr(row.gap) << '\n';
}

inline void write_spectrum_csv(std::ostream& os, const SpectrumReport& report) {
  os << "index,computed,predicted\n";
  for (std::size_t i = 0; i < report.computed.size(); ++i)
    os << i << ',' << scalar_repr(report.computed[i]) << ','
       << scalar_repr(report.predicted[i]) << '\n';
}

template <ScalarField S>
void write_poincare_csv(std::ostream& os, const PoincareReport<S>& report) {
  os << "lhs,rhs,slack,equality_flag,projection_residual\n";
  os << scalar_repr(report.lhs) << ',' << scalar_repr(report.rhs) << ','
     << scalar_repr(report.slack) << ',' << (report.equality_flag ? 1 : 0) << ','
     << scalar_repr(report.projection_residual) << '\n';
}

// ---------------------------------------------------------------------------
// JSON report builders.

template <ScalarField S>
json poincare_json(const PoincareReport<S>& report) {
  return json{{"lhs", scalar_json(report.lhs)},
              {"rhs", scalar_json(report.rhs)},
              {"slack", scalar_json(report.slack)},
              {"equality_flag", report.equality_flag},
              {"projection_residual", scalar_json(report.projection_residual)}};
}

inline json spectrum_json(const SpectrumReport& report) {
  return json{{"computed", report.computed},
              {"predicted", report.predicted},
              {"max_deviation", report.max_deviation}};
}

inline json log_sobolev_json(const LogSobolevResult& res) {
  return json{{"lhs", res.lhs}, {"rhs", res.rhs}, {"violated", res.violated}};
}

inline json counterexample_json(const std::optional<CounterexampleResult>& res) {
  if (!res.has_value()) return json{{"found", false}};
  std::vector<double> f(res->f.data(), res->f.data() + res->f.size());
  return json{{"found", true},
              {"margin", res->margin},
              {"lhs", res->lhs},
              {"rhs", res->rhs},
              {"f", f}};
}

inline json translation_json(const TranslationPath& path) {
  return json{{"fundamental", path.fundamental_flag},
              {"min_entry", path.min_entry},
              {"final_residual", path.final_residual},
              {"max_mass_drift", path.max_mass_drift},
              {"grid_points", path.times.size()}};
}

inline json necessary_conditions_json(const NecessaryConditions& nc) {
  return json{{"ok", nc.ok}, {"violations", nc.violations}};
}

inline json poisson_json(const std::vector<PoissonLimitRow>& rows) {
  json arr = json::array();
  for (const PoissonLimitRow& row : rows)
    arr.push_back(json{{"n", row.n},
                       {"t", row.t},
                       {"binomial_constant", row.binomial_constant},
                       {"poisson_constant", row.poisson_constant},
                       {"gap", row.gap}});
  return arr;
}

}  // namespace nablan
