#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cospect/config.hpp"
#include "cospect/env_walks.hpp"
#include "cospect/fiber.hpp"
#include "cospect/folner.hpp"
#include "cospect/invariant.hpp"
#include "cospect/io.hpp"
#include "cospect/radial.hpp"

namespace cospect {

// 0 success, 1 validation error, 2 computational non-convergence (partial
// artifacts still written)
struct CommandResult {
  json payload;
  int exit_code = 0;
  std::vector<std::pair<std::string, std::string>> artifacts;  // suffix -> content
};

namespace detail {

inline json fit_or_null(const std::vector<double>& p2k, const FitSpec& spec, int K,
                        uint64_t seed) {
  auto [lo, hi] = spec.window_for(K);
  try {
    return estimate_to_json(fit_radius(p2k, lo, hi, spec.model), seed);
  } catch (const error& e) {
    return json{{"error", e.what()}};
  }
}

}  // namespace detail

inline CommandResult run_walk_radius(const json& cfg, int workers) {
  check_keys(cfg,
             {"seed", "group", "subgroup", "targets", "nu", "K", "N", "fit", "restrict_ball"},
             {"seed", "group", "nu", "K", "N"}, "walk-radius config");
  uint64_t seed = parse_seed(cfg);
  MarkedGroup group = parse_group(cfg.at("group"));
  StepDistribution nu = parse_nu(cfg.at("nu"), group);
  int K = cfg.at("K").get<int>();
  int64_t N = cfg.at("N").get<int64_t>();
  FitSpec fit = cfg.contains("fit") ? FitSpec::parse(cfg.at("fit")) : FitSpec{};

  std::vector<SubgroupOracle> targets;
  if (cfg.contains("targets")) {
    require(!cfg.contains("subgroup"), errc::config_error,
            "give either 'subgroup' or 'targets', not both");
    for (const auto& t : cfg.at("targets")) targets.push_back(parse_subgroup(t, group));
    require(!targets.empty(), errc::config_error, "targets must be nonempty");
  } else {
    require(cfg.contains("subgroup"), errc::config_error, "missing 'subgroup' (or 'targets')");
    targets.push_back(parse_subgroup(cfg.at("subgroup"), group));
  }

  std::optional<int64_t> restrict_ball;
  if (cfg.contains("restrict_ball")) restrict_ball = cfg.at("restrict_ball").get<int64_t>();

  std::vector<ReturnSeries> series;
  if (restrict_ball) {
    require(targets.size() == 1, errc::config_error, "restrict_ball expects a single target");
    int64_t radius = *restrict_ball;
    const SubgroupOracle& sub = targets[0];
    TargetSetFactory f = [&sub, radius] {
      return std::make_unique<RestrictedSubgroupTargetSet>(
          sub, [radius](const WalkState& pos) {
            return static_cast<int64_t>(pos.length()) <= radius;
          });
    };
    series = run_walk_series(group, nu, f, K, N, seed, workers);
  } else {
    series = coupled_series(group, targets, nu, K, N, seed, workers);
  }

  CommandResult res;
  json out_series = json::array(), out_estimates = json::array();
  auto [lo, hi] = fit.window_for(K);
  for (size_t i = 0; i < series.size(); ++i) {
    out_series.push_back(series_to_json(series[i]));
    json est = detail::fit_or_null(series[i].p_hat_all(), fit, K, seed);
    if (nu.is_lazy() && est.contains("value"))
      est["delazified"] = delazify(est["value"].get<double>());
    out_estimates.push_back(est);
    std::string suffix = series.size() == 1 ? ".csv" : ".target" + std::to_string(i) + ".csv";
    res.artifacts.emplace_back(suffix, series_to_csv(series[i]));
  }
  res.payload["window"] = {lo, hi};
  res.payload["series"] = series.size() == 1 ? out_series[0] : out_series;
  res.payload["estimate"] = series.size() == 1 ? out_estimates[0] : out_estimates;
  return res;
}

inline CommandResult run_spectral_radius(const json& cfg, int workers) {
  check_keys(cfg,
             {"seed", "group", "subgroup", "nu", "radii", "radius", "tol", "max_iter",
              "state_cap", "folner", "almost_invariant", "export_edges"},
             {"seed", "group", "subgroup", "nu"}, "spectral-radius config");
  uint64_t seed = parse_seed(cfg);
  (void)seed;  // deterministic pipeline; echoed via the envelope
  MarkedGroup group = parse_group(cfg.at("group"));
  SubgroupOracle sub = parse_subgroup(cfg.at("subgroup"), group);
  StepDistribution nu = parse_nu(cfg.at("nu"), group);
  double tol = cfg.value("tol", 1e-10);
  int max_iter = cfg.value("max_iter", 10000);
  int64_t state_cap = cfg.value("state_cap", static_cast<int64_t>(5000000));

  std::vector<int> radii;
  if (cfg.contains("radii"))
    radii = cfg.at("radii").get<std::vector<int>>();
  else if (cfg.contains("radius"))
    radii = {cfg.at("radius").get<int>()};
  require(!radii.empty(), errc::config_error, "give 'radii' or 'radius'");

  CommandResult res;
  json sweep = json::array();
  bool capped = false;
  std::optional<CosetBall> last_ball;
  for (int r : radii) {
    try {
      CosetBall ball = explore_ball(group, sub, nu, r, state_cap);
      auto op = build_markov(ball, nu);
      auto est = operator_norm(op, tol, max_iter, workers);
      sweep.push_back({{"radius", r},
                       {"states", ball.states()},
                       {"norm", est.value},
                       {"iterations", est.iterations},
                       {"residual", est.residual},
                       {"converged", est.converged}});
      if (!est.converged) res.exit_code = 2;
      last_ball = std::move(ball);
    } catch (const error& e) {
      if (e.code() != errc::ball_too_large) throw;
      sweep.push_back({{"radius", r}, {"error", e.what()}});
      capped = true;
      break;  // larger radii would hit the same cap
    }
  }
  res.payload["sweep"] = sweep;
  if (capped) {
    res.payload["truncated_sweep"] = true;
    res.exit_code = 2;
  }

  if (last_ball) {
    if (cfg.contains("folner")) {
      const auto& fj = cfg.at("folner");
      check_keys(fj, {"phi", "epsilon"}, {"phi", "epsilon"}, "folner");
      std::vector<Word> phi;
      for (const auto& w : fj.at("phi")) phi.push_back(parse_word(w, "folner phi"));
      auto fr = folner_search(*last_ball, group, sub, phi, fj.at("epsilon").get<double>());
      json fjson;
      fjson["found"] = fr.found;
      if (fr.found) {
        fjson["radius"] = fr.radius;
        fjson["set_size"] = fr.states.size();
        fjson["ratios"] = fr.ratios;
      }
      res.payload["folner"] = fjson;
    }
    if (cfg.contains("almost_invariant")) {
      const auto& aj = cfg.at("almost_invariant");
      check_keys(aj, {"epsilon", "budget"}, {"epsilon"}, "almost_invariant");
      StepDistribution lazy = nu.is_lazy() ? nu : nu.make_lazy();
      CosetBall lazy_ball = explore_ball(group, sub, lazy, last_ball->radius, state_cap);
      auto op = build_markov(lazy_ball, lazy);
      std::vector<double> zeta(static_cast<size_t>(op.dim()), 0.0);
      zeta[0] = 1.0;
      auto inv = almost_invariant_from_power(op, zeta, aj.at("epsilon").get<double>(),
                                             aj.value("budget", 10000), workers);
      res.payload["almost_invariant"] = {{"stopped", inv.stopped},
                                         {"iterations", inv.iterations},
                                         {"residual", inv.residual},
                                         {"best_quantity", inv.best_quantity}};
      if (!inv.stopped) res.exit_code = std::max(res.exit_code, 2);
    }
    if (cfg.value("export_edges", false))
      res.artifacts.emplace_back(".edges.csv", ball_edges_to_csv(*last_ball, nu));
  }
  return res;
}

inline CommandResult run_finrel(const json& cfg, int workers) {
  (void)workers;  // module contract: single-threaded, deterministic
  check_keys(cfg,
             {"seed", "n", "r_generators", "s_generators", "nu", "E", "K", "epsilon", "budget",
              "reports"},
             {"seed", "n", "r_generators", "s_generators", "nu"}, "finrel config");
  uint64_t seed = parse_seed(cfg);
  int n = cfg.at("n").get<int>();
  auto R = build_relation_from_permutations(n, parse_permutations(cfg.at("r_generators"), "R"));
  auto S = build_relation_from_permutations(n, parse_permutations(cfg.at("s_generators"), "S"));
  auto fib = fiber_space(R, S);

  std::vector<FullGroupAtom> atoms;
  for (const auto& a : cfg.at("nu")) {
    check_keys(a, {"perm", "prob"}, {"perm", "prob"}, "finrel nu atom");
    atoms.emplace_back(FullGroupElement::checked(R, a.at("perm").get<std::vector<int>>()),
                       a.at("prob").get<double>());
  }

  std::vector<int> E;
  if (cfg.contains("E"))
    E = cfg.at("E").get<std::vector<int>>();
  else {
    E.resize(static_cast<size_t>(n));
    std::iota(E.begin(), E.end(), 0);
  }
  int K = cfg.value("K", 25);
  std::set<std::string> reports;
  if (cfg.contains("reports"))
    for (const auto& r : cfg.at("reports")) reports.insert(r.get<std::string>());
  else
    reports = {"mass_transport", "fiber", "series", "tfae", "components"};

  CommandResult res;
  std::vector<int> fiber_sizes(static_cast<size_t>(n));
  for (int x = 0; x < n; ++x) fiber_sizes[static_cast<size_t>(x)] = fib.fiber_size(x);
  res.payload["fiber"] = {{"points", n},
                          {"pairs", fib.size()},
                          {"total_measure", fib.total_measure()},
                          {"fiber_sizes", fiber_sizes}};

  if (reports.count("components")) res.payload["components"] = ergodic_components(R);

  if (reports.count("mass_transport")) {
    // seeded random transport function over the relation
    rng_stream rng(seed, 0xf00d);
    std::vector<double> values(static_cast<size_t>(n) * static_cast<size_t>(n));
    for (auto& v : values) v = rng.uniform01();
    auto [lhs, rhs] = mass_transport_check(R, [&](int x, int y) {
      return values[static_cast<size_t>(x) * static_cast<size_t>(n) + static_cast<size_t>(y)];
    });
    res.payload["mass_transport"] = {{"lhs", lhs},
                                     {"rhs", rhs},
                                     {"discrepancy", std::fabs(lhs - rhs)},
                                     {"accumulation", "compensated"}};
  }

  if (reports.count("series")) {
    auto op = lambda_nu_matrix(fib, atoms);
    auto zeta = zeta_E(fib, E);
    FiberProjection proj(fib, E);
    auto series = restricted_norm_series(fib, op, zeta, K, &proj);
    res.payload["series"] = {{"s_k", series.s_k}, {"masked_norm", series.masked_norm}};
  }

  if (reports.count("tfae")) {
    auto rep = tfae_witnesses(fib, atoms, cfg.value("epsilon", 0.05), cfg.value("budget", 10000));
    res.payload["tfae"] = {{"stopped", rep.stopped},
                           {"iterations", rep.iterations},
                           {"l2_residual", rep.l2_residual},
                           {"reiter_l1", rep.reiter_l1},
                           {"reiter_l1_bound", rep.reiter_l1_bound},
                           {"fiberwise_residuals", rep.fiberwise_residuals},
                           {"best_quantity", rep.best_quantity}};
    if (!rep.stopped) res.exit_code = 2;
  }
  return res;
}

inline CommandResult run_percolate(const json& cfg, int workers) {
  check_keys(cfg, {"seed", "group", "nu", "p_levels", "K", "N", "windows", "uinf_window", "fit"},
             {"seed", "group", "nu", "p_levels", "K", "N"}, "percolate config");
  uint64_t seed = parse_seed(cfg);
  MarkedGroup group = parse_group(cfg.at("group"));
  StepDistribution nu = parse_nu(cfg.at("nu"), group);
  auto p_levels = cfg.at("p_levels").get<std::vector<double>>();
  int K = cfg.at("K").get<int>();
  std::vector<int64_t> windows;
  if (cfg.contains("windows")) {
    windows = cfg.at("windows").get<std::vector<int64_t>>();
  } else {
    // default window: the walk cannot leave the 2K-step ball
    int64_t max_atom = 1;
    for (const auto& a : nu.atoms())
      max_atom = std::max<int64_t>(max_atom, static_cast<int64_t>(a.element.size()));
    windows = {2 * static_cast<int64_t>(K) * max_atom};
  }
  int64_t N = cfg.at("N").get<int64_t>();
  int64_t uinf_window = cfg.value("uinf_window", static_cast<int64_t>(0));
  FitSpec fit = cfg.contains("fit") ? FitSpec::parse(cfg.at("fit")) : FitSpec{};

  std::vector<Word> gens;
  for (const auto& a : nu.atoms())
    if (!a.element.empty()) gens.push_back(a.element);

  auto sweep = percolation_sweep(group, gens, p_levels, windows, nu, K, N, seed, uinf_window,
                                 workers);

  CommandResult res;
  res.payload["samples"] = sweep.samples;
  res.payload["p_levels"] = p_levels;
  res.payload["windows"] = windows;
  json levels = json::array();
  for (size_t pi = 0; pi < p_levels.size(); ++pi) {
    json per_window = json::array();
    for (size_t wi = 0; wi < windows.size(); ++wi) {
      const auto& rs = sweep.series[pi][wi];
      json entry;
      entry["window"] = windows[wi];
      entry["series"] = series_to_json(rs);
      entry["fit_lower"] = detail::fit_or_null(rs.p_hat_all(), fit, K, seed);
      entry["fit_upper"] = detail::fit_or_null(rs.p_hat_upper_all(), fit, K, seed);
      per_window.push_back(entry);
    }
    double rate = sweep.samples > 0 && uinf_window > 0
                      ? static_cast<double>(sweep.uinf_hits[pi]) / static_cast<double>(sweep.samples)
                      : 0.0;
    levels.push_back({{"p", p_levels[pi]},
                      {"uinf_proxy_rate", rate},
                      {"windows", per_window}});
  }
  res.payload["levels"] = levels;
  for (size_t wi = 0; wi < windows.size(); ++wi)
    res.artifacts.emplace_back(".w" + std::to_string(windows[wi]) + ".csv",
                               percolation_to_csv(sweep, wi));
  return res;
}

inline CommandResult run_smallpieces(const json& cfg, int workers) {
  check_keys(cfg, {"seed", "group", "nu", "p", "K", "N", "fit"},
             {"seed", "group", "nu", "p", "K", "N"}, "smallpieces config");
  uint64_t seed = parse_seed(cfg);
  MarkedGroup group = parse_group(cfg.at("group"));
  StepDistribution nu = parse_nu(cfg.at("nu"), group);
  double p = cfg.at("p").get<double>();
  int K = cfg.at("K").get<int>();
  int64_t N = cfg.at("N").get<int64_t>();
  FitSpec fit = cfg.contains("fit") ? FitSpec::parse(cfg.at("fit")) : FitSpec{};

  auto res2 = smallpieces_series(group, p, nu, K, N, seed, workers);

  CommandResult res;
  res.payload["on_E"] = {{"series", series_to_json(res2.on_E)},
                         {"estimate", detail::fit_or_null(res2.on_E.p_hat_all(), fit, K, seed)}};
  res.payload["off_E"] = {{"series", series_to_json(res2.off_E)},
                          {"estimate", detail::fit_or_null(res2.off_E.p_hat_all(), fit, K, seed)}};
  res.payload["split"] = {{"on_E", res2.on_E.samples}, {"off_E", res2.off_E.samples}};
  res.artifacts.emplace_back(".on_e.csv", series_to_csv(res2.on_E));
  res.artifacts.emplace_back(".off_e.csv", series_to_csv(res2.off_E));
  return res;
}

inline CommandResult run_mean_ergodic(const json& cfg, int workers) {
  (void)workers;
  check_keys(cfg,
             {"seed", "group", "generators", "xi", "folner_sets", "folner_prefix_lengths",
              "lambda_generators"},
             {"seed", "group", "generators", "xi"}, "mean-ergodic config");
  parse_seed(cfg);  // mandatory, echoed; the computation is deterministic
  MarkedGroup group = parse_group(cfg.at("group"));

  std::vector<cmatrix> gens;
  for (const auto& m : cfg.at("generators")) gens.push_back(parse_cmatrix(m, "generator"));
  cvector xi = parse_cvector(cfg.at("xi"), "xi");

  std::vector<std::vector<Word>> folner;
  if (cfg.contains("folner_sets")) {
    for (const auto& fs : cfg.at("folner_sets")) {
      std::vector<Word> f;
      for (const auto& w : fs) f.push_back(parse_word(w, "folner set"));
      folner.push_back(std::move(f));
    }
  } else if (cfg.contains("folner_prefix_lengths")) {
    require(group.generator_count() == 1, errc::config_error,
            "folner_prefix_lengths shorthand needs a single-generator group");
    for (int nlen : cfg.at("folner_prefix_lengths").get<std::vector<int>>()) {
      std::vector<Word> f;
      for (int k = 0; k < nlen; ++k)
        f.push_back(Word(std::vector<int32_t>(static_cast<size_t>(k), 1)));
      folner.push_back(std::move(f));
    }
  }
  require(!folner.empty(), errc::config_error, "give folner_sets or folner_prefix_lengths");

  std::vector<Word> lambda_gens;
  bool has_lambda = cfg.contains("lambda_generators");
  if (has_lambda)
    for (const auto& w : cfg.at("lambda_generators"))
      lambda_gens.push_back(parse_word(w, "lambda generator"));

  auto rep = mean_ergodic_average(group, gens, xi, folner, has_lambda ? &lambda_gens : nullptr);

  CommandResult res;
  res.payload["deviations"] = rep.deviations;
  json proj = json::array();
  for (const auto& z : rep.fixed_projection) proj.push_back({z.real(), z.imag()});
  res.payload["fixed_projection"] = proj;
  json avgs = json::array();
  for (const auto& avg : rep.averages) {
    json row = json::array();
    for (const auto& z : avg) row.push_back({z.real(), z.imag()});
    avgs.push_back(row);
  }
  res.payload["averages"] = avgs;
  return res;
}

}  // namespace cospect
