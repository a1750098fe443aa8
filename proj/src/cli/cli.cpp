// SPDX-License-Identifier: MIT

#include "cli/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include <nablan/nablan.hpp>

namespace nablan {
namespace {

// ---------------------------------------------------------------------------
// Input parsing helpers.

template <ScalarField S>
S parse_t(const std::string& text) {
  S t = [&] {
    if constexpr (is_exact_v<S>) {
      // Decimals come in exactly, then are snapped to denominator <= 10^6.
      return best_rational_approx(rational_from_string(text), 1000000UL);
    } else {
      return double_from_string(text);
    }
  }();
  return t;
}

template <ScalarField S>
GridFunction<S> parse_grid_function(const std::string& text, Index expected_len) {
  std::vector<S> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(scalar_from_string<S>(item));
  if (static_cast<Index>(vals.size()) != expected_len)
    throw std::invalid_argument("--f needs exactly " + std::to_string(expected_len) +
                                " comma-separated values, got " +
                                std::to_string(vals.size()));
  GridFunction<S> f(expected_len);
  for (Index k = 0; k < expected_len; ++k) f[k] = vals[static_cast<std::size_t>(k)];
  return f;
}

std::vector<Index> parse_n_list(const std::string& text) {
  std::vector<Index> ns;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    const long v = std::stol(item, &pos);
    if (pos != item.size() || v < 1)
      throw std::invalid_argument("--n-list: bad entry '" + item + "'");
    ns.push_back(v);
  }
  if (ns.empty()) throw std::invalid_argument("--n-list: empty list");
  return ns;
}

// Output sink: --out path or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::invalid_argument("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  ~Sink() {
    if (file_) file_->flush();
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

template <ScalarField S>
GridFunction<S> random_grid_function(Index n, std::mt19937_64& rng) {
  GridFunction<S> f(n + 1);
  for (Index k = 0; k <= n; ++k) {
    if constexpr (is_exact_v<S>) {
      const long num = static_cast<long>(rng() % 19) - 9;
      const long den = 1 + static_cast<long>(rng() % 9);
      f[k] = make_rational(num, den);
    } else {
      f[k] = 2.0 * detail::uniform01(rng) - 1.0;
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// verify: the identity suite at one (n, t).

template <ScalarField S>
struct CheckRow {
  std::string name;
  S residual;
  bool pass;
};

template <ScalarField S>
int cmd_verify(const RunConfig& cfg) {
  const BinomialParams<S> params(cfg.n, parse_t<S>(cfg.t_text));
  params.require_interior("verify");
  const Index n = params.n;
  const WeightVector<S> b = binomial_pmf(params);

  std::vector<CheckRow<S>> rows;
  const auto judge = [&](const S& residual) {
    if constexpr (is_exact_v<S>)
      return residual == S(0);
    else
      return residual <= cfg.tol;
  };
  const auto push = [&](const std::string& name, const S& residual) {
    rows.push_back({name, residual, judge(residual)});
  };

  // Unit mass of the pmf.
  {
    Accumulator<S> acc;
    for (Index k = 0; k <= n; ++k) acc.add(b.values[k]);
    push("pmf_mass", abs_scalar<S>(acc.total() - S(1)));
  }

  // Adjointness over random pairs: <nabla_n f, g> = <f, nabla_star g> and
  // <nabla_n f, g>_b = <f, nabla_tilde g>_b.
  {
    std::mt19937_64 rng(cfg.seed);
    S worst_plain(0), worst_weighted(0);
    for (int p = 0; p < cfg.pairs; ++p) {
      const GridFunction<S> f = random_grid_function<S>(n, rng);
      const GridFunction<S> g = random_grid_function<S>(n, rng);
      const S plain =
          abs_scalar<S>(inner_unweighted(nabla_n(f), g) - inner_unweighted(f, nabla_star(g)));
      const S weighted = abs_scalar<S>(inner_weighted(nabla_n(f), g, b) -
                                       inner_weighted(f, nabla_tilde(params, g), b));
      if (plain > worst_plain) worst_plain = plain;
      if (weighted > worst_weighted) worst_weighted = weighted;
    }
    push("adjoint_unweighted", worst_plain);
    push("adjoint_weighted", worst_weighted);
  }

  // Matrix-level identities: nabla_star = nabla_n^T and the conjugation
  // nabla_tilde = D^{-1} nabla_n^T D.
  {
    const OperatorMatrix<S> grad = nabla_n_matrix<S>(n);
    const OperatorMatrix<S> star = nabla_star_matrix<S>(n);
    push("matrix_transpose",
         OperatorMatrix<S>(star - grad.transpose()).cwiseAbs().maxCoeff());
    const OperatorMatrix<S> conj = weight_diagonal_inverse(params) * grad.transpose() *
                                   weight_diagonal(params);
    push("conjugation",
         OperatorMatrix<S>(nabla_tilde_matrix(params) - conj).cwiseAbs().maxCoeff());
  }

  // Ladder identities for every r (the appliers throw on violation).
  {
    const KrawtchoukBasis<S> basis = generate_basis(params);
    S ladder_residual(0);
    bool ladder_ok = true;
    try {
      for (Index r = 0; r <= n; ++r) {
        (void)ladder_down(basis, r);
        (void)ladder_up(basis, r);
      }
    } catch (const std::logic_error&) {
      ladder_ok = false;
      ladder_residual = S(1);
    }
    rows.push_back({"ladders", ladder_residual, ladder_ok});

    push("orthogonality", orthogonality_residual(basis));

    // Spectrum: exact Rayleigh quotients, float dense eigensolve.
    if constexpr (is_exact_v<S>) {
      S worst(0);
      for (Index r = 0; r <= n; ++r) {
        const S dev =
            abs_scalar<S>(rayleigh_quotient(basis, r) - composition_eigenvalue(params, r));
        if (dev > worst) worst = dev;
      }
      push("rayleigh", worst);
    } else {
      push("spectrum", operator_spectrum(params).max_deviation);
    }
  }

  // Transport identity on a random f.
  {
    std::mt19937_64 rng(cfg.seed + 17);
    const GridFunction<S> f = random_grid_function<S>(n, rng);
    const auto [lhs, rhs] = transport_identity_exact(f, params);
    push("transport", abs_scalar<S>(lhs - rhs));
  }

  bool all_pass = true;
  for (const auto& row : rows) all_pass = all_pass && row.pass;

  Sink sink(cfg.out_path);
  if (cfg.format == "csv") {
    sink.stream() << "check,residual,pass\n";
    for (const auto& row : rows)
      sink.stream() << row.name << ',' << scalar_repr(row.residual) << ','
                    << (row.pass ? 1 : 0) << '\n';
  } else {
    json checks = json::array();
    for (const auto& row : rows)
      checks.push_back(
          {{"name", row.name}, {"residual", scalar_json(row.residual)}, {"pass", row.pass}});
    const json doc{{"command", "verify"},
                   {"n", cfg.n},
                   {"t", scalar_repr(params.t)},
                   {"backend", cfg.backend},
                   {"checks", checks},
                   {"pass", all_pass}};
    sink.stream() << doc.dump(2) << '\n';
  }
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// spectrum

int cmd_spectrum_float(const RunConfig& cfg) {
  const BinomialParams<double> params(cfg.n, parse_t<double>(cfg.t_text));
  const SpectrumReport report = operator_spectrum(params);
  Sink sink(cfg.out_path);
  if (cfg.format == "csv")
    write_spectrum_csv(sink.stream(), report);
  else
    sink.stream() << spectrum_json(report).dump(2) << '\n';
  return report.max_deviation <= cfg.tol ? 0 : 1;
}

int cmd_spectrum_exact(const RunConfig& cfg) {
  const BinomialParams<Rational> params(cfg.n, parse_t<Rational>(cfg.t_text));
  const KrawtchoukBasis<Rational> basis = generate_basis(params);
  bool ok = true;
  std::vector<Rational> lambdas;
  for (Index r = 0; r <= params.n; ++r) {
    const Rational predicted = composition_eigenvalue(params, r);
    ok = ok && (rayleigh_quotient(basis, r) == predicted);
    lambdas.push_back(predicted);
  }
  Sink sink(cfg.out_path);
  if (cfg.format == "csv") {
    sink.stream() << "r,lambda\n";
    for (Index r = 0; r <= params.n; ++r)
      sink.stream() << r << ',' << scalar_repr(lambdas[static_cast<std::size_t>(r)]) << '\n';
  } else {
    json arr = json::array();
    for (Index r = 0; r <= params.n; ++r)
      arr.push_back({{"r", r}, {"lambda", scalar_repr(lambdas[static_cast<std::size_t>(r)])}});
    sink.stream() << json{{"command", "spectrum"},
                          {"backend", "exact"},
                          {"eigenvalues", arr},
                          {"rayleigh_verified", ok}}
                         .dump(2)
                  << '\n';
  }
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// poincare

template <ScalarField S>
int cmd_poincare(const RunConfig& cfg) {
  const BinomialParams<S> params(cfg.n, parse_t<S>(cfg.t_text));
  if (cfg.f_text.empty()) throw std::invalid_argument("poincare: --f is required");
  const GridFunction<S> f = parse_grid_function<S>(cfg.f_text, params.n + 1);
  const PoincareReport<S> report = poincare_check(f, params);
  Sink sink(cfg.out_path);
  if (cfg.format == "csv")
    write_poincare_csv(sink.stream(), report);
  else
    sink.stream() << poincare_json(report).dump(2) << '\n';
  if constexpr (is_exact_v<S>)
    return report.slack >= S(0) ? 0 : 1;
  else
    return report.slack >= -cfg.slack_tol ? 0 : 1;
}

// ---------------------------------------------------------------------------
// logsobolev / logsobolev-search (float only: entropy needs logarithms)

int cmd_logsobolev(const RunConfig& cfg) {
  const BinomialParams<double> params(cfg.n, parse_t<double>(cfg.t_text));
  if (cfg.f_text.empty()) throw std::invalid_argument("logsobolev: --f is required");
  const GridFunction<double> f = parse_grid_function<double>(cfg.f_text, params.n + 1);
  const LogSobolevResult res = log_sobolev_check(f, params);
  Sink sink(cfg.out_path);
  if (cfg.format == "csv") {
    sink.stream() << "lhs,rhs,violated\n"
                  << scalar_repr(res.lhs) << ',' << scalar_repr(res.rhs) << ','
                  << (res.violated ? 1 : 0) << '\n';
  } else {
    sink.stream() << log_sobolev_json(res).dump(2) << '\n';
  }
  return 0;  // Reporting a violation is a successful run, not a failure.
}

int cmd_logsobolev_search(const RunConfig& cfg) {
  const BinomialParams<double> params(cfg.n, parse_t<double>(cfg.t_text));
  const auto result = counterexample_search(params, cfg.trials, cfg.seed);
  Sink sink(cfg.out_path);
  sink.stream() << counterexample_json(result).dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// translate

int cmd_translate(const RunConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("translate: --n must be >= 1");
  const DerivativeFamily<double> family = family_from_spec<double>(cfg.n, cfg.family);
  const TranslationPath path = is_fundamental_solution(family, uniform_time_grid(cfg.grid_points));
  const NecessaryConditions nc = necessary_conditions(family);
  Sink sink(cfg.out_path);
  if (cfg.format == "csv") {
    write_path_csv(sink.stream(), path);
  } else {
    json doc = translation_json(path);
    doc["necessary_conditions"] = necessary_conditions_json(nc);
    sink.stream() << doc.dump(2) << '\n';
  }
  return path.fundamental_flag ? 0 : 1;
}

// ---------------------------------------------------------------------------
// poisson-limit

int cmd_poisson_limit(const RunConfig& cfg) {
  const std::vector<PoissonLimitRow> rows = poisson_limit_table(cfg.lambda, parse_n_list(cfg.n_list));
  Sink sink(cfg.out_path);
  if (cfg.format == "csv")
    write_poisson_csv(sink.stream(), rows);
  else
    sink.stream() << poisson_json(rows).dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// dump-basis / dump-operator

template <ScalarField S>
int cmd_dump_basis(const RunConfig& cfg) {
  const BinomialParams<S> params(cfg.n, parse_t<S>(cfg.t_text));
  const KrawtchoukBasis<S> basis = generate_basis(params);
  Sink sink(cfg.out_path);
  write_basis_csv(sink.stream(), basis);
  if (!cfg.norms_out.empty()) {
    Sink norms_sink(cfg.norms_out);
    write_norms_csv(norms_sink.stream(), basis);
  }
  return 0;
}

template <ScalarField S>
int cmd_dump_operator(const RunConfig& cfg) {
  const BinomialParams<S> params(cfg.n, parse_t<S>(cfg.t_text));
  const OperatorTag tag = parse_operator_tag(cfg.op);
  std::optional<DerivativeFamily<S>> family;
  if (tag == OperatorTag::AlphaDerivative)
    family.emplace(family_from_spec<S>(cfg.n, cfg.family));
  const OperatorMatrix<S> m =
      matrix_of<S>(tag, params, family ? &*family : nullptr);
  Sink sink(cfg.out_path);
  write_matrix_csv(sink.stream(), m);
  return 0;
}

// ---------------------------------------------------------------------------
// Wiring.

void require_float_backend(const RunConfig& cfg, const char* what) {
  if (cfg.backend != "float")
    throw std::invalid_argument(std::string(what) +
                                ": only --backend float is supported "
                                "(needs transcendental functions)");
}

int dispatch(const RunConfig& cfg) {
  const bool exact = cfg.backend == "exact";
  if (cfg.command == "verify") return exact ? cmd_verify<Rational>(cfg) : cmd_verify<double>(cfg);
  if (cfg.command == "spectrum") return exact ? cmd_spectrum_exact(cfg) : cmd_spectrum_float(cfg);
  if (cfg.command == "poincare")
    return exact ? cmd_poincare<Rational>(cfg) : cmd_poincare<double>(cfg);
  if (cfg.command == "logsobolev") {
    require_float_backend(cfg, "logsobolev");
    return cmd_logsobolev(cfg);
  }
  if (cfg.command == "logsobolev-search") {
    require_float_backend(cfg, "logsobolev-search");
    return cmd_logsobolev_search(cfg);
  }
  if (cfg.command == "translate") {
    require_float_backend(cfg, "translate");
    return cmd_translate(cfg);
  }
  if (cfg.command == "poisson-limit") {
    require_float_backend(cfg, "poisson-limit");
    return cmd_poisson_limit(cfg);
  }
  if (cfg.command == "dump-basis")
    return exact ? cmd_dump_basis<Rational>(cfg) : cmd_dump_basis<double>(cfg);
  if (cfg.command == "dump-operator")
    return exact ? cmd_dump_operator<Rational>(cfg) : cmd_dump_operator<double>(cfg);
  throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{"Interpolated discrete derivative toolkit on {0,...,n}: binomial "
               "measure, Krawtchouk ladder, Poincare/log-Sobolev checks, and the "
               "n-translation problem."};
  app.require_subcommand(1);

  const auto add_common = [&](CLI::App* sub, bool needs_n) {
    if (needs_n) sub->add_option("--n", cfg.n, "grid order n (grid {0,...,n})")->required();
    sub->add_option("--t", cfg.t_text, "success parameter t (rational 'p/q' or decimal)");
    sub->add_option("--backend", cfg.backend, "scalar backend")
        ->check(CLI::IsMember({"float", "exact"}));
    sub->add_option("--format", cfg.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", cfg.out_path, "write output to this file instead of stdout");
  };

  CLI::App* verify = app.add_subcommand("verify", "run the operator identity suite");
  add_common(verify, true);
  verify->add_option("--pairs", cfg.pairs, "random pairs for adjointness")->check(CLI::PositiveNumber);
  verify->add_option("--seed", cfg.seed, "seed for the random pairs");
  verify->add_option("--tol", cfg.tol, "float residual tolerance");

  CLI::App* spectrum = app.add_subcommand("spectrum", "spectrum of nabla_tilde . nabla_n");
  add_common(spectrum, true);
  spectrum->add_option("--tol", cfg.tol, "max deviation accepted (float backend)");

  CLI::App* poincare = app.add_subcommand("poincare", "Poincare inequality report for --f");
  add_common(poincare, true);
  poincare->add_option("--f", cfg.f_text, "grid function, n+1 comma-separated values")->required();
  poincare->add_option("--tol", cfg.slack_tol, "slack tolerance (float backend)");

  CLI::App* logsob = app.add_subcommand("logsobolev", "log-Sobolev check for --f");
  add_common(logsob, true);
  logsob->add_option("--f", cfg.f_text, "strictly positive grid function")->required();

  CLI::App* search = app.add_subcommand("logsobolev-search", "search for log-Sobolev violations");
  add_common(search, true);
  search->add_option("--trials", cfg.trials, "random restarts")->check(CLI::NonNegativeNumber);
  search->add_option("--seed", cfg.seed, "search seed");

  CLI::App* translate = app.add_subcommand("translate", "evolve X(t) = exp(ntA)e_0 and judge it");
  add_common(translate, true);
  translate->add_option("--family", cfg.family,
                        "canonical | left | right | const:<x> | values:<a0,...,an>");
  translate->add_option("--grid", cfg.grid_points, "uniform time-grid points on [0,1]")
      ->check(CLI::Range(2, 100000));

  CLI::App* poisson = app.add_subcommand("poisson-limit", "Poincare constants at t = lambda/n");
  poisson->add_option("--lambda", cfg.lambda, "Poisson intensity")->check(CLI::PositiveNumber);
  poisson->add_option("--n-list", cfg.n_list, "comma-separated n values");
  poisson->add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
  poisson->add_option("--out", cfg.out_path, "write output to this file instead of stdout");

  CLI::App* dump_basis = app.add_subcommand("dump-basis", "Krawtchouk basis values as CSV");
  add_common(dump_basis, true);
  dump_basis->add_option("--norms-out", cfg.norms_out, "also write norm constants C_r here");

  CLI::App* dump_op = app.add_subcommand("dump-operator", "dense operator matrix as CSV");
  add_common(dump_op, true);
  dump_op->add_option("--op", cfg.op,
                      "nabla_n | nabla_star | nabla_tilde | alpha_derivative | D | "
                      "D_inverse | composition")
      ->required();
  dump_op->add_option("--family", cfg.family, "family for --op alpha_derivative");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, returns 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  cfg.command = chosen->get_name();
  // verify defaults to the exact backend: identities should hold on the nose.
  if (cfg.command == "verify" && chosen->count("--backend") == 0) cfg.backend = "exact";

  try {
    return dispatch(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nablan
