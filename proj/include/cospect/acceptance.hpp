#pragma once

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cospect/env_walks.hpp"
#include "cospect/ergodic.hpp"
#include "cospect/fiber.hpp"
#include "cospect/fit.hpp"
#include "cospect/folner.hpp"
#include "cospect/invariant.hpp"
#include "cospect/radial.hpp"

namespace cospect {

// The acceptance battery behind `verify`: one entry per criterion, every
// threshold pinned here. Details strings carry the measured numbers so a
// failure is diagnosable from the one-line report.

struct CriterionResult {
  std::string id;
  std::string name;
  bool passed = false;
  std::string details;
  double seconds = 0;
};

namespace acceptance_detail {

constexpr double kFreeF2Radius = 0.8660254037844386;  // sqrt(3)/2

inline std::vector<int> random_perm(rng_stream& rng, int n) {
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(p[static_cast<size_t>(i)], p[rng.below(static_cast<uint64_t>(i + 1))]);
  return p;
}

inline std::vector<int> compose(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[static_cast<size_t>(b[i])];
  return c;
}

// exact per-point return probabilities by dense chain iteration
inline std::vector<std::vector<double>> pointwise_returns(int n,
                                                          const std::vector<FullGroupAtom>& atoms,
                                                          const FiniteRelation& S, int K) {
  std::vector<std::vector<double>> P(static_cast<size_t>(n),
                                     std::vector<double>(static_cast<size_t>(n), 0.0));
  for (const auto& [g, p] : atoms)
    for (int x = 0; x < n; ++x)
      P[static_cast<size_t>(x)][static_cast<size_t>(g.perm[static_cast<size_t>(x)])] += p;
  std::vector<std::vector<double>> out(static_cast<size_t>(K),
                                      std::vector<double>(static_cast<size_t>(n), 0.0));
  for (int x = 0; x < n; ++x) {
    std::vector<double> dist(static_cast<size_t>(n), 0.0), next(dist);
    dist[static_cast<size_t>(x)] = 1.0;
    for (int t = 1; t <= 2 * K; ++t) {
      std::fill(next.begin(), next.end(), 0.0);
      for (int y = 0; y < n; ++y)
        if (dist[static_cast<size_t>(y)] != 0)
          for (int z = 0; z < n; ++z)
            if (P[static_cast<size_t>(y)][static_cast<size_t>(z)] != 0)
              next[static_cast<size_t>(z)] +=
                  dist[static_cast<size_t>(y)] * P[static_cast<size_t>(y)][static_cast<size_t>(z)];
      dist.swap(next);
      if ((t & 1) == 0) {
        double hit = 0;
        for (int y = 0; y < n; ++y)
          if (S.related(x, y)) hit += dist[static_cast<size_t>(y)];
        out[static_cast<size_t>(t / 2 - 1)][static_cast<size_t>(x)] = hit;
      }
    }
  }
  return out;
}

inline std::vector<Word> standard_gens(const MarkedGroup& g) {
  std::vector<Word> gens;
  for (int i = 1; i <= g.generator_count(); ++i) {
    gens.push_back(word_of({i}));
    gens.push_back(word_of({-i}));
  }
  return gens;
}

inline CriterionResult with_runtime_budget(CriterionResult res, double seconds_budget) {
  if (res.seconds > seconds_budget) {
    res.passed = false;
    std::ostringstream d;
    d << res.details << " [runtime " << res.seconds << " s exceeded the " << seconds_budget
      << " s budget]";
    res.details = d.str();
  }
  return res;
}

template <typename Fn>
CriterionResult timed(const std::string& id, const std::string& name, Fn&& fn) {
  CriterionResult res;
  res.id = id;
  res.name = name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    std::ostringstream details;
    res.passed = fn(details);
    res.details = details.str();
  } catch (const std::exception& e) {
    res.passed = false;
    res.details = std::string("exception: ") + e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace acceptance_detail

inline CriterionResult criterion_a1(int workers) {
  using namespace acceptance_detail;
  return with_runtime_budget(timed("A1", "Kesten value on F2 (nonamenable)", [&](std::ostringstream& d) {
    auto oracle = radial_oracle_free(2, 200, 10000);
    bool eigen_ok = std::fabs(oracle.eigen_bound - kFreeF2Radius) <= 1e-4;
    bool series_ok = oracle.p2k[0] == 0.25 && oracle.p2k[1] == 7.0 / 64.0;

    auto F2 = MarkedGroup::free_group(2);
    auto lazy = StepDistribution::uniform_on_generators(F2).make_lazy();
    auto series =
        sample_return_series(F2, SubgroupOracle::trivial(F2), lazy, 20, 1000000, 20240809, workers);
    auto est = fit_radius(series, 10, 20, FitModel::loglinear_polycorrected);
    double lazy_oracle = (1.0 + oracle.eigen_bound) / 2.0;
    bool mc_ok = std::fabs(est.value - lazy_oracle) <= 0.02;

    d << "eigen=" << oracle.eigen_bound << " (target 0.866025 +-1e-4), p2=" << oracle.p2k[0]
      << ", p4=" << oracle.p2k[1] << "; lazy MC fit=" << est.value << " vs lazy oracle "
      << lazy_oracle << " (+-0.02), delazified=" << delazify(est.value);
    return eigen_ok && series_ok && mc_ok;
  }), 120.0);
}

inline CriterionResult criterion_a2(int workers) {
  using namespace acceptance_detail;
  return with_runtime_budget(timed("A2", "amenable Z^2 has radius 1", [&](std::ostringstream& d) {
    auto Z2 = MarkedGroup::free_abelian(2);
    auto nu = StepDistribution::uniform_on_generators(Z2);
    auto triv = SubgroupOracle::trivial(Z2);
    double norm60 = 0;
    for (int r : {20, 40, 60}) {
      auto op = build_markov(explore_ball(Z2, triv, nu, r), nu);
      norm60 = operator_norm(op, 1e-12, 30000, workers).value;
    }
    auto series = sample_return_series(Z2, triv, nu, 30, 200000, 1702, workers);
    auto est = fit_radius(series, 15, 30, FitModel::loglinear_polycorrected);
    d << "norm(r=60)=" << norm60 << " (>=0.99); MC fit=" << est.value << " (>=0.97)";
    return norm60 >= 0.99 && est.value >= 0.97;
  }), 60.0);
}

inline CriterionResult criterion_a3(int workers) {
  using namespace acceptance_detail;
  return with_runtime_budget(timed("A3", "coamenable kernel of F2 -> Z", [&](std::ostringstream& d) {
    auto F2 = MarkedGroup::free_group(2);
    auto Z = MarkedGroup::free_abelian(1);
    auto ker = SubgroupOracle::kernel_of_hom(GroupHomomorphism(F2, Z, {word_of({1}), Word()}));
    auto nu = StepDistribution::uniform_on_generators(F2);
    auto ball = explore_ball(F2, ker, nu, 1000);
    auto norm = operator_norm(build_markov(ball, nu), 1e-12, 30000, workers).value;
    auto fol = folner_search(ball, F2, ker,
                             {word_of({1}), word_of({-1}), word_of({2}), word_of({-2})}, 0.1);
    d << "states=" << ball.states() << ", norm=" << norm << " (>=0.999); folner "
      << (fol.found ? "found r=" + std::to_string(fol.radius) : "NOT FOUND") << " at eps=0.1";
    return norm >= 0.999 && fol.found;
  }), 30.0);
}

inline CriterionResult criterion_a4(int workers) {
  using namespace acceptance_detail;
  return timed("A4", "non-coamenable <a> <= F2", [&](std::ostringstream& d) {
    // exact lumped Schreier chain: loops at the root, free branching beyond
    const int K = 20;
    auto chain = cyclic_in_free_radial_chain(2, 3 * K);
    auto p_exact = chain_return_series(chain, K);
    auto dp = fit_radius(p_exact, 10, 20, FitModel::loglinear);

    auto F2 = MarkedGroup::free_group(2);
    auto nu = StepDistribution::uniform_on_generators(F2);
    auto cyc = SubgroupOracle::cyclic_generator(F2, 1);
    auto series = sample_return_series(F2, cyc, nu, K, 1000000, 4242, workers);
    auto mc = fit_radius(series, 10, 20, FitModel::loglinear);

    auto ball = explore_ball(F2, cyc, nu, 10);
    double norm = operator_norm(build_markov(ball, nu), 1e-12, 30000, workers).value;

    bool agree = std::fabs(mc.value - dp.value) <= 0.02 && std::fabs(norm - dp.value) <= 0.02;
    bool away = dp.value <= 0.95 && mc.value <= 0.95 && norm <= 0.95;
    d << "DP fit=" << dp.value << ", MC fit=" << mc.value << ", truncated norm=" << norm
      << " (pairwise +-0.02 of DP, all <=0.95)";
    return agree && away;
  });
}

inline CriterionResult criterion_a5(int workers) {
  using namespace acceptance_detail;
  return timed("A5", "small-pieces dichotomy at p = 1/2", [&](std::ostringstream& d) {
    auto F2 = MarkedGroup::free_group(2);
    auto nu = StepDistribution::uniform_on_generators(F2);
    auto res = smallpieces_series(F2, 0.5, nu, 20, 1000000, 31415, workers);
    auto on = fit_radius(res.on_E, 10, 20, FitModel::loglinear_polycorrected);
    auto off = fit_radius(res.off_E, 10, 20, FitModel::loglinear_polycorrected);
    auto oracle = radial_oracle_free(2, 2, 10000);
    bool on_ok = on.value >= 0.97;
    bool off_ok = std::fabs(off.value - oracle.eigen_bound) <= 0.02;
    d << "on-E fit=" << on.value << " (>=0.97, samples " << res.on_E.samples
      << "); off-E fit=" << off.value << " vs oracle " << oracle.eigen_bound << " (+-0.02, samples "
      << res.off_E.samples << ")";
    return on_ok && off_ok;
  });
}

inline CriterionResult criterion_a6(int) {
  using namespace acceptance_detail;
  return timed("A6", "mass transport, exact", [&](std::ostringstream& d) {
    rng_stream rng(606060, 0);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
      int n = 2 + static_cast<int>(rng.below(63));
      std::vector<std::vector<int>> perms;
      for (int i = 0, np = 1 + static_cast<int>(rng.below(2)); i < np; ++i)
        perms.push_back(random_perm(rng, n));
      auto R = build_relation_from_permutations(n, perms);
      std::vector<double> values(static_cast<size_t>(n) * static_cast<size_t>(n));
      for (auto& v : values) v = rng.uniform01();
      auto [lhs, rhs] = mass_transport_check(R, [&](int x, int y) {
        return values[static_cast<size_t>(x) * static_cast<size_t>(n) + static_cast<size_t>(y)];
      });
      worst = std::max(worst, std::fabs(lhs - rhs));
    }
    d << "worst discrepancy over 100 random (relation, f) pairs, n<=64: " << worst
      << " (<=1e-12)";
    return worst <= 1e-12;
  });
}

inline CriterionResult criterion_a7(int) {
  using namespace acceptance_detail;
  return timed("A7", "trace identity at the pre-limit level", [&](std::ostringstream& d) {
    rng_stream rng(707070, 0);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      int n = 4 + static_cast<int>(rng.below(29));
      auto g1 = random_perm(rng, n);
      auto g2 = random_perm(rng, n);
      auto R = build_relation_from_permutations(n, {g1, g2});
      auto S = build_relation_from_permutations(n, {compose(g1, g1)});
      auto fib = fiber_space(R, S);
      auto inv = [](const std::vector<int>& p) {
        return FullGroupElement{FullGroupElement{p}.inverse()};
      };
      std::vector<FullGroupAtom> atoms = {{FullGroupElement{g1}, 0.25},
                                          {inv(g1), 0.25},
                                          {FullGroupElement{g2}, 0.25},
                                          {inv(g2), 0.25}};
      auto op = lambda_nu_matrix(fib, atoms);
      std::vector<int> all(static_cast<size_t>(n));
      std::iota(all.begin(), all.end(), 0);
      auto xi0 = zeta_E(fib, all);
      const int K = 50;
      auto pointwise = pointwise_returns(n, atoms, S, K);
      std::vector<double> v = xi0, tmp;
      for (int k = 1; k <= K; ++k) {
        op.apply(v, tmp);
        op.apply(tmp, v);
        double corr = fib.ip(v, xi0);
        double avg = 0;
        for (int x = 0; x < n; ++x)
          avg += pointwise[static_cast<size_t>(k - 1)][static_cast<size_t>(x)];
        worst = std::max(worst, std::fabs(corr - avg / n));
      }
    }
    d << "worst |<lambda(nu)^{2k} xi0, xi0> - avg p_{2k,x,S}| over 20 models, k<=50: " << worst
      << " (<=1e-10)";
    return worst <= 1e-10;
  });
}

inline CriterionResult criterion_a8(int workers) {
  using namespace acceptance_detail;
  return timed("A8", "monotone couplings, zero violations", [&](std::ostringstream& d) {
    auto F2 = MarkedGroup::free_group(2);
    auto nu = StepDistribution::uniform_on_generators(F2);
    std::vector<SubgroupOracle> targets;
    targets.push_back(SubgroupOracle::trivial(F2));
    targets.push_back(SubgroupOracle::cyclic_generator(F2, 1));
    auto series = coupled_series(F2, targets, nu, 10, 100000, 808080, workers);
    int64_t violations = 0;
    for (int k = 0; k < 10; ++k)
      if (series[0].hits[static_cast<size_t>(k)] > series[1].hits[static_cast<size_t>(k)])
        ++violations;

    auto sweep = percolation_sweep(F2, standard_gens(F2), {0.3, 0.6}, {10}, nu, 5, 20000, 909090,
                                   0, workers);
    int64_t pviol = 0;
    for (int k = 0; k < 5; ++k) {
      if (sweep.series[0][0].hits[static_cast<size_t>(k)] >
          sweep.series[1][0].hits[static_cast<size_t>(k)])
        ++pviol;
      if (sweep.series[0][0].hits_upper[static_cast<size_t>(k)] >
          sweep.series[1][0].hits_upper[static_cast<size_t>(k)])
        ++pviol;
    }
    d << "subgroup coupling violations: " << violations << "/10 over 1e5 paths; percolation "
      << "violations: " << pviol << " (p=0.3 vs 0.6, shared edge uniforms)";
    return violations == 0 && pviol == 0;
  });
}

inline CriterionResult criterion_a9(int workers) {
  using namespace acceptance_detail;
  return timed("A9", "almost-invariant construction", [&](std::ostringstream& d) {
    auto Z = MarkedGroup::free_abelian(1);
    auto lazyZ = StepDistribution::uniform_on_generators(Z).make_lazy();
    auto ballZ = explore_ball(Z, SubgroupOracle::trivial(Z), lazyZ, 200);
    auto opZ = build_markov(ballZ, lazyZ);
    std::vector<double> zetaZ(static_cast<size_t>(opZ.dim()), 0.0);
    zetaZ[0] = 1.0;
    auto resZ = almost_invariant_from_power(opZ, zetaZ, 0.1, 10000, workers);
    bool z_ok = resZ.stopped && resZ.residual <= 0.1 + 1e-12;
    bool z_monotone = true;
    for (double r : resZ.a_ratios)
      if (r > 1.0 + 1e-12) z_monotone = false;

    auto F2 = MarkedGroup::free_group(2);
    auto lazyF = StepDistribution::uniform_on_generators(F2).make_lazy();
    auto ballF = explore_ball(F2, SubgroupOracle::trivial(F2), lazyF, 12);
    auto opF = build_markov(ballF, lazyF);
    std::vector<double> zetaF(static_cast<size_t>(opF.dim()), 0.0);
    zetaF[0] = 1.0;
    auto resF = almost_invariant_from_power(opF, zetaF, 0.05, 2000, workers);
    double lazy_bound = (1.0 + kFreeF2Radius) / 2.0;
    double floor = 1.0 - lazy_bound * lazy_bound;  // every iterate obeys this
    bool f_ok = !resF.stopped && resF.residual >= floor - 1e-9;
    bool f_monotone = true;
    for (double r : resF.a_ratios)
      if (r > 1.0 + 1e-12) f_monotone = false;

    d << "Z: stopped at n=" << resZ.iterations << ", residual=" << resZ.residual
      << " (<=0.1), a nonincreasing=" << (z_monotone ? "yes" : "NO") << "; F2 (radius 12, "
      << ballF.states() << " states): stopped=" << (resF.stopped ? "YES" : "no")
      << ", residual=" << resF.residual << " >= floor " << floor
      << ", a nonincreasing=" << (f_monotone ? "yes" : "NO");
    return z_ok && z_monotone && f_ok && f_monotone;
  });
}

inline CriterionResult criterion_a10(int) {
  using namespace acceptance_detail;
  return timed("A10", "weak mean ergodic averages", [&](std::ostringstream& d) {
    auto Z = MarkedGroup::free_abelian(1);
    cmatrix quarter = {{cscalar(0, 0), cscalar(-1, 0)}, {cscalar(1, 0), cscalar(0, 0)}};
    cvector xi = {cscalar(1, 0), cscalar(0, 0)};
    std::vector<std::vector<Word>> f4 = {{}};
    f4[0].clear();
    for (int j = 0; j < 4; ++j)
      f4[0].push_back(Word(std::vector<int32_t>(static_cast<size_t>(j), 1)));
    auto rep4 = mean_ergodic_average(Z, {quarter}, xi, f4);
    bool exact_zero = rep4.deviations[0] == 0.0;
    for (const auto& z : rep4.fixed_projection)
      if (std::abs(z) != 0.0) exact_zero = false;

    cmatrix rot1 = {{cscalar(std::cos(1.0), 0), cscalar(-std::sin(1.0), 0)},
                    {cscalar(std::sin(1.0), 0), cscalar(std::cos(1.0), 0)}};
    std::vector<std::vector<Word>> folner;
    for (int n = 1; n <= 1000; ++n) {
      std::vector<Word> f;
      for (int j = 0; j < n; ++j)
        f.push_back(Word(std::vector<int32_t>(static_cast<size_t>(j), 1)));
      folner.push_back(std::move(f));
    }
    auto rep = mean_ergodic_average(Z, {rot1}, xi, folner);
    double denom = std::abs(cscalar(1, 0) - std::exp(cscalar(0, 1)));
    bool bound_ok = true;
    double worst_slack = 0;
    for (int n = 1; n <= 1000; ++n) {
      double bound = 2.0 / (n * denom);
      double dev = rep.deviations[static_cast<size_t>(n - 1)];
      if (dev > bound + 1e-12) bound_ok = false;
      worst_slack = std::max(worst_slack, dev - bound);
    }
    d << "quarter-turn avg_4 exactly zero: " << (exact_zero ? "yes" : "NO")
      << "; angle-1 bound holds for n<=1000 (worst slack " << worst_slack << ")";
    return exact_zero && bound_ok;
  });
}

inline CriterionResult criterion_a11(int workers) {
  using namespace acceptance_detail;
  return timed("A11", "percolation brackets (exploratory)", [&](std::ostringstream& d) {
    auto F2 = MarkedGroup::free_group(2);
    auto nu = StepDistribution::uniform_on_generators(F2);
    auto gens = standard_gens(F2);
    const int K = 6;
    auto sweep = percolation_sweep(F2, gens, {0.4, 0.6, 0.8}, {6, 12}, nu, K, 4000, 111111, 8,
                                   workers);
    bool ordered = true, nested = true;
    for (size_t pi = 0; pi < 3; ++pi)
      for (int k = 0; k < K; ++k) {
        for (size_t wi = 0; wi < 2; ++wi)
          if (sweep.series[pi][wi].hits[static_cast<size_t>(k)] >
              sweep.series[pi][wi].hits_upper[static_cast<size_t>(k)])
            ordered = false;
        if (sweep.series[pi][0].hits[static_cast<size_t>(k)] >
                sweep.series[pi][1].hits[static_cast<size_t>(k)] ||
            sweep.series[pi][1].hits_upper[static_cast<size_t>(k)] >
                sweep.series[pi][0].hits_upper[static_cast<size_t>(k)])
          nested = false;
      }

    auto full = percolation_sweep(F2, gens, {1.0}, {2 * K}, nu, K, 4000, 111111, 0, workers);
    auto fit = fit_radius(full.series[0][0], 1, K, FitModel::loglinear);
    bool one_ok = std::fabs(fit.value - 1.0) <= 1e-6;

    d << "lower<=upper: " << (ordered ? "yes" : "NO") << "; brackets tighten W=6 -> 12: "
      << (nested ? "yes" : "NO") << "; p=1 fitted radius=" << fit.value << " (1 +- 1e-6)";
    return ordered && nested && one_ok;
  });
}

struct AcceptanceOptions {
  int workers = 2;
  std::vector<std::string> only;  // run everything when empty
};

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {}) {
  std::vector<CriterionResult> out;
  auto want = [&](const char* id) {
    return opt.only.empty() ||
           std::find(opt.only.begin(), opt.only.end(), id) != opt.only.end();
  };
  if (want("A1")) out.push_back(criterion_a1(opt.workers));
  if (want("A2")) out.push_back(criterion_a2(opt.workers));
  if (want("A3")) out.push_back(criterion_a3(opt.workers));
  if (want("A4")) out.push_back(criterion_a4(opt.workers));
  if (want("A5")) out.push_back(criterion_a5(opt.workers));
  if (want("A6")) out.push_back(criterion_a6(opt.workers));
  if (want("A7")) out.push_back(criterion_a7(opt.workers));
  if (want("A8")) out.push_back(criterion_a8(opt.workers));
  if (want("A9")) out.push_back(criterion_a9(opt.workers));
  if (want("A10")) out.push_back(criterion_a10(opt.workers));
  if (want("A11")) out.push_back(criterion_a11(opt.workers));
  return out;
}

}  // namespace cospect
