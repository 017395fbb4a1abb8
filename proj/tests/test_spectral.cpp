#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cospect/ball.hpp"
#include "cospect/ergodic.hpp"
#include "cospect/folner.hpp"
#include "cospect/invariant.hpp"
#include "cospect/radial.hpp"
#include "cospect/sparse.hpp"

using namespace cospect;

namespace {

// cyclic Jacobi eigensolver, used only as an independent oracle in tests
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  size_t n = a.size();
  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    if (off < 1e-26) break;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-15) continue;
        double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1));
        double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (size_t k = 0; k < n; ++k) {
          double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> eig(n);
  for (size_t i = 0; i < n; ++i) eig[i] = a[i][i];
  std::sort(eig.begin(), eig.end());
  return eig;
}

std::vector<std::vector<double>> dense_of(const SparseOperator& op) {
  std::vector<std::vector<double>> d(static_cast<size_t>(op.dim()),
                                     std::vector<double>(static_cast<size_t>(op.dim()), 0));
  op.for_each_entry([&](int64_t r, int64_t c, double w) {
    d[static_cast<size_t>(r)][static_cast<size_t>(c)] += w;
  });
  return d;
}

cmatrix rotation(double angle) {
  return {{cscalar(std::cos(angle), 0), cscalar(-std::sin(angle), 0)},
          {cscalar(std::sin(angle), 0), cscalar(std::cos(angle), 0)}};
}

}  // namespace

TEST_CASE("ball exploration: state counts from small cases") {
  auto Z = MarkedGroup::free_abelian(1);
  auto nuZ = StepDistribution::uniform_on_generators(Z);
  auto ballZ = explore_ball(Z, SubgroupOracle::trivial(Z), nuZ, 2);
  CHECK(ballZ.states() == 5);  // {-2..2}

  auto F2 = MarkedGroup::free_group(2);
  auto nuF = StepDistribution::uniform_on_generators(F2);
  auto ballF = explore_ball(F2, SubgroupOracle::trivial(F2), nuF, 1);
  CHECK(ballF.states() == 5);  // root + 4 neighbors

  auto ZZ = MarkedGroup::free_abelian(1);
  auto ker = SubgroupOracle::kernel_of_hom(GroupHomomorphism(F2, ZZ, {word_of({1}), Word()}));
  auto ballK = explore_ball(F2, ker, nuF, 3);
  CHECK(ballK.states() == 7);  // integers -3..3, b-edges are loops
}

TEST_CASE("ball cap raises BallTooLarge") {
  auto F2 = MarkedGroup::free_group(2);
  auto nu = StepDistribution::uniform_on_generators(F2);
  CHECK_THROWS_AS(explore_ball(F2, SubgroupOracle::trivial(F2), nu, 5, 20), error);
}

TEST_CASE("markov operator: radius-0 Z ball loses all mass") {
  auto Z = MarkedGroup::free_abelian(1);
  auto nu = StepDistribution::uniform_on_generators(Z);
  auto ball = explore_ball(Z, SubgroupOracle::trivial(Z), nu, 0);
  auto op = build_markov(ball, nu);
  CHECK(op.dim() == 1);
  CHECK(op.nnz() == 0);
  CHECK(operator_norm(op).value == 0.0);
}

TEST_CASE("F2 star ball: weights 1/4 and norm 1/2 against an exact eigensolve") {
  auto F2 = MarkedGroup::free_group(2);
  auto nu = StepDistribution::uniform_on_generators(F2);
  auto ball = explore_ball(F2, SubgroupOracle::trivial(F2), nu, 1);
  auto op = build_markov(ball, nu);
  CHECK(op.dim() == 5);
  CHECK(op.symmetry_defect() == 0.0);
  CHECK(op.max_row_sum() <= 1.0 + 1e-12);
  CHECK(op.entry(0, 1) == 0.25);
  CHECK(op.entry(1, 0) == 0.25);

  auto eig = jacobi_eigenvalues(dense_of(op));
  CHECK(eig.back() == Catch::Approx(0.5).margin(1e-12));

  auto est = operator_norm(op, 1e-13, 10000);
  CHECK(est.converged);
  CHECK(est.value == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("kernel ball radius 1: a-edges 1/4, b-loop 1/2 per state") {
  auto F2 = MarkedGroup::free_group(2);
  auto Z = MarkedGroup::free_abelian(1);
  auto ker = SubgroupOracle::kernel_of_hom(GroupHomomorphism(F2, Z, {word_of({1}), Word()}));
  auto nu = StepDistribution::uniform_on_generators(F2);
  auto ball = explore_ball(F2, ker, nu, 1);
  auto op = build_markov(ball, nu);
  REQUIRE(op.dim() == 3);
  for (int64_t s = 0; s < 3; ++s) CHECK(op.entry(s, s) == 0.5);  // b and b^-1 loop
  CHECK(op.entry(0, 1) == 0.25);
  CHECK(op.entry(0, 2) == 0.25);
  CHECK(op.entry(1, 2) == 0.0);  // +1 and -1 are not adjacent
}

TEST_CASE("operator_norm basics") {
  std::vector<SparseOperator::Triplet> id;
  for (int64_t i = 0; i < 7; ++i) id.emplace_back(i, i, 1.0);
  auto I = SparseOperator::from_triplets(7, id, true);
  CHECK(operator_norm(I).value == Catch::Approx(1.0).margin(1e-12));

  auto flip = SparseOperator::from_triplets(2, {{0, 1, 0.5}, {1, 0, 0.5}}, true);
  CHECK(operator_norm(flip).value == Catch::Approx(0.5).margin(1e-12));

  auto asym = SparseOperator::from_triplets(2, {{0, 1, 0.5}}, false);
  CHECK_THROWS_AS(operator_norm(asym), error);
}

TEST_CASE("radial oracle: exact returns and eigen bounds") {
  auto o2 = radial_oracle_free(2, 2, 10);
  CHECK(o2.p2k[0] == 0.25);
  CHECK(o2.p2k[1] == 7.0 / 64.0);

  auto b2 = radial_oracle_free(2, 2, 10000);
  CHECK(b2.eigen_bound == Catch::Approx(0.866025).margin(1e-5));
  auto b3 = radial_oracle_free(3, 2, 10000);
  CHECK(b3.eigen_bound == Catch::Approx(std::sqrt(5.0) / 3.0).margin(1e-5));

  CHECK_THROWS_AS(radial_oracle_free(2, 100, 150), error);  // R < 2K
  CHECK_THROWS_AS(radial_oracle_free(1, 2, 10), error);
}

TEST_CASE("truncation monotonicity and the norm ceiling") {
  auto F2 = MarkedGroup::free_group(2);
  auto nu = StepDistribution::uniform_on_generators(F2);
  auto triv = SubgroupOracle::trivial(F2);
  double prev = 0;
  for (int r : {1, 2, 4, 6}) {
    auto op = build_markov(explore_ball(F2, triv, nu, r), nu);
    double v = operator_norm(op, 1e-12, 20000).value;
    CHECK(v >= prev - 1e-10);
    CHECK(v <= 1.0 + 1e-9);
    prev = v;
  }
  CHECK(prev <= std::sqrt(3.0) / 2.0 + 1e-9);  // from below
}

TEST_CASE("almost invariant vectors: identity operator stops immediately") {
  std::vector<SparseOperator::Triplet> id;
  for (int64_t i = 0; i < 4; ++i) id.emplace_back(i, i, 1.0);
  auto I = SparseOperator::from_triplets(4, id, true);
  std::vector<double> zeta = {1, 0, 0, 0};
  auto res = almost_invariant_from_power(I, zeta, 0.1);
  CHECK(res.stopped);
  CHECK(res.iterations == 0);
  CHECK(res.residual == 0.0);
  CHECK(res.xi == zeta);
}

TEST_CASE("almost invariant vectors on the lazy Z ball fire within budget") {
  auto Z = MarkedGroup::free_abelian(1);
  auto lazy = StepDistribution::uniform_on_generators(Z).make_lazy();
  auto ball = explore_ball(Z, SubgroupOracle::trivial(Z), lazy, 200);
  REQUIRE(ball.states() == 401);
  auto op = build_markov(ball, lazy);
  std::vector<double> zeta(static_cast<size_t>(op.dim()), 0.0);
  zeta[0] = 1.0;
  auto res = almost_invariant_from_power(op, zeta, 0.1, 10000);
  CHECK(res.stopped);
  CHECK(res.residual <= 0.1 + 1e-9);
  for (double r : res.a_ratios) CHECK(r <= 1.0 + 1e-12);  // a_k is nonincreasing
}

TEST_CASE("almost invariant vectors on the F2 ball cannot stop: certified floor") {
  auto F2 = MarkedGroup::free_group(2);
  auto lazy = StepDistribution::uniform_on_generators(F2).make_lazy();
  auto ball = explore_ball(F2, SubgroupOracle::trivial(F2), lazy, 8);
  auto op = build_markov(ball, lazy);
  std::vector<double> zeta(static_cast<size_t>(op.dim()), 0.0);
  zeta[0] = 1.0;
  auto res = almost_invariant_from_power(op, zeta, 0.05, 400);
  CHECK_FALSE(res.stopped);
  double lazy_norm_bound = (1.0 + std::sqrt(3.0) / 2.0) / 2.0;
  double floor = 1.0 - lazy_norm_bound * lazy_norm_bound;
  CHECK(res.residual >= floor - 1e-9);
  for (double r : res.a_ratios) CHECK(r <= 1.0 + 1e-12);
}

TEST_CASE("non-lazy operators are rejected by the invariant construction") {
  auto Z = MarkedGroup::free_abelian(1);
  auto nu = StepDistribution::uniform_on_generators(Z);
  auto op = build_markov(explore_ball(Z, SubgroupOracle::trivial(Z), nu, 10), nu);
  std::vector<double> zeta(static_cast<size_t>(op.dim()), 0.0);
  zeta[0] = 1.0;
  CHECK_THROWS_AS(almost_invariant_from_power(op, zeta, 0.1), error);
}

TEST_CASE("Folner search on Z finds the radius-3 ball at eps = 0.3") {
  auto Z = MarkedGroup::free_abelian(1);
  auto nu = StepDistribution::uniform_on_generators(Z);
  auto triv = SubgroupOracle::trivial(Z);
  auto ball = explore_ball(Z, triv, nu, 10);
  auto res = folner_search(ball, Z, triv, {word_of({1})}, 0.3);
  REQUIRE(res.found);
  CHECK(res.radius == 3);
  CHECK(res.states.size() == 7);
  CHECK(res.ratios[0] == Catch::Approx(2.0 / 7.0));

  // independent recheck of the certificate by raw coset-key counting
  int64_t crossings = 0;
  for (int64_t s : res.states) {
    Word moved = Z.multiply(ball.reps[static_cast<size_t>(s)], word_of({1}));
    std::string key = triv.coset_key(moved);
    bool inside = false;
    for (int64_t t : res.states)
      if (ball.keys[static_cast<size_t>(t)] == key) inside = true;
    if (!inside) ++crossings;
  }
  CHECK(2.0 * static_cast<double>(crossings) / static_cast<double>(res.states.size()) < 0.3);
}

TEST_CASE("Folner search fails on the F2 ball and reports NotFound") {
  auto F2 = MarkedGroup::free_group(2);
  auto nu = StepDistribution::uniform_on_generators(F2);
  auto triv = SubgroupOracle::trivial(F2);
  auto ball = explore_ball(F2, triv, nu, 6);
  auto res = folner_search(ball, F2, triv,
                           {word_of({1}), word_of({-1}), word_of({2}), word_of({-2})}, 0.5);
  CHECK_FALSE(res.found);
}

TEST_CASE("Folner search on the whole-group coset space returns the fixed point") {
  auto F2 = MarkedGroup::free_group(2);
  auto nu = StepDistribution::uniform_on_generators(F2);
  auto whole = SubgroupOracle::whole(F2);
  auto ball = explore_ball(F2, whole, nu, 3);
  CHECK(ball.states() == 1);
  auto res = folner_search(ball, F2, whole, {word_of({1}), word_of({2})}, 0.01);
  REQUIRE(res.found);
  CHECK(res.radius == 0);
  CHECK(res.states == std::vector<int64_t>{0});
}

TEST_CASE("mean ergodic averages: quarter-turn rotation vanishes at n = 4") {
  auto Z = MarkedGroup::free_abelian(1);
  std::vector<std::vector<Word>> folner;
  for (int n : {1, 2, 4}) {
    std::vector<Word> f;
    for (int j = 0; j < n; ++j) f.push_back(Word(std::vector<int32_t>(static_cast<size_t>(j), 1)));
    folner.push_back(std::move(f));
  }
  cvector xi = {cscalar(1, 0), cscalar(0, 0)};
  cmatrix quarter_turn = {{cscalar(0, 0), cscalar(-1, 0)}, {cscalar(1, 0), cscalar(0, 0)}};
  auto rep = mean_ergodic_average(Z, {quarter_turn}, xi, folner);
  for (const auto& x : rep.fixed_projection) CHECK(std::abs(x) == 0.0);
  CHECK(rep.deviations[2] == 0.0);  // (I + R + R^2 + R^3)/4 = 0 exactly
}

TEST_CASE("mean ergodic averages: identity representation is already fixed") {
  auto Z = MarkedGroup::free_abelian(1);
  cmatrix id = {{cscalar(1, 0), cscalar(0, 0)}, {cscalar(0, 0), cscalar(1, 0)}};
  cvector xi = {cscalar(0.6, 0), cscalar(0.8, 0)};
  std::vector<std::vector<Word>> folner = {{Word(), word_of({1}), word_of({1, 1})}};
  auto rep = mean_ergodic_average(Z, {id}, xi, folner, nullptr);
  CHECK(rep.deviations[0] <= 1e-12);
  for (size_t i = 0; i < xi.size(); ++i)
    CHECK(std::abs(rep.fixed_projection[i] - xi[i]) <= 1e-12);
}

TEST_CASE("mean ergodic averages obey the geometric-series bound for angle 1") {
  auto Z = MarkedGroup::free_abelian(1);
  cvector xi = {cscalar(1, 0), cscalar(0, 0)};
  std::vector<std::vector<Word>> folner;
  for (int n = 1; n <= 200; ++n) {
    std::vector<Word> f;
    for (int j = 0; j < n; ++j) f.push_back(Word(std::vector<int32_t>(static_cast<size_t>(j), 1)));
    folner.push_back(std::move(f));
  }
  auto rep = mean_ergodic_average(Z, {rotation(1.0)}, xi, folner);
  double denom = std::abs(cscalar(1, 0) - std::exp(cscalar(0, 1)));
  for (int n = 1; n <= 200; ++n) {
    double bound = 2.0 / (n * denom);
    CHECK(rep.deviations[static_cast<size_t>(n - 1)] <= bound + 1e-12);
  }
}

TEST_CASE("mean ergodic validation errors") {
  auto Z = MarkedGroup::free_abelian(1);
  cvector xi = {cscalar(1, 0), cscalar(0, 0)};
  cmatrix shear = {{cscalar(1, 0), cscalar(1, 0)}, {cscalar(0, 0), cscalar(1, 0)}};
  CHECK_THROWS_AS(mean_ergodic_average(Z, {shear}, xi, {{Word()}}), error);

  std::vector<Word> lambda_gens = {word_of({1})};
  CHECK_THROWS_AS(mean_ergodic_average(Z, {rotation(1.0)}, xi, {{Word()}}, &lambda_gens), error);
}

TEST_CASE("build_markov rejects a mismatched step support") {
  auto Z = MarkedGroup::free_abelian(2);
  auto nu_x = StepDistribution::from_atoms(Z, {{word_of({1}), 0.5}, {word_of({-1}), 0.5}});
  auto nu_y = StepDistribution::from_atoms(Z, {{word_of({2}), 0.5}, {word_of({-2}), 0.5}});
  auto ball = explore_ball(Z, SubgroupOracle::trivial(Z), nu_x, 3);
  CHECK_THROWS_AS(build_markov(ball, nu_y), error);
}

TEST_CASE("operator_norm reports non-convergence but returns its best value") {
  // two nearly degenerate eigenvalues force slow power iteration
  auto op = SparseOperator::from_triplets(
      2, {{0, 0, 0.9999999}, {1, 1, 0.9999998}}, true);
  auto est = operator_norm(op, 1e-16, 3);
  CHECK_FALSE(est.converged);
  CHECK(est.iterations == 3);
  CHECK(est.value > 0.99);
  CHECK(est.value <= 1.0);
}

TEST_CASE("finite-index subgroup: two-coset Schreier graph has norm one") {
  auto F2 = MarkedGroup::free_group(2);
  CosetTable t;
  t.table = {{1, 1, 1, 1}, {0, 0, 0, 0}};  // index 2: every generator swaps cosets
  auto sub = SubgroupOracle::finite_index_table(F2, t);
  auto nu = StepDistribution::uniform_on_generators(F2);
  auto ball = explore_ball(F2, sub, nu, 4);
  REQUIRE(ball.states() == 2);
  auto op = build_markov(ball, nu);
  CHECK(op.entry(0, 1) == 1.0);
  CHECK(op.entry(1, 0) == 1.0);
  CHECK(operator_norm(op, 1e-13, 1000).value == Catch::Approx(1.0).margin(1e-12));

  auto fol = folner_search(ball, F2, sub, {word_of({1}), word_of({2})}, 0.5);
  REQUIRE(fol.found);
  CHECK(fol.radius == 1);  // the whole two-point space is invariant
  CHECK(fol.states.size() == 2);
}

TEST_CASE("cyclic-in-free radial chain lumps the Schreier walk exactly") {
  // distance-from-root of the <a>\F2 walk: loop 1/2 at the root, else up 3/4
  auto chain = cyclic_in_free_radial_chain(2, 10);
  auto p = chain_return_series(chain, 3);
  CHECK(p[0] == 6.0 / 16.0);

  // full-ball truncation has a radial Perron vector, so the lumped chain and
  // the explored ball agree on the truncated norm to machine precision
  auto F2 = MarkedGroup::free_group(2);
  auto nu = StepDistribution::uniform_on_generators(F2);
  auto cyc = SubgroupOracle::cyclic_generator(F2, 1);
  for (int r : {2, 4, 6}) {
    auto ball = explore_ball(F2, cyc, nu, r);
    double ball_norm = operator_norm(build_markov(ball, nu), 1e-14, 50000).value;
    double chain_norm = chain_top_eigenvalue(cyclic_in_free_radial_chain(2, r));
    CHECK(ball_norm == Catch::Approx(chain_norm).margin(1e-9));
  }
}

TEST_CASE("Sturm bisection matches a Jacobi eigensolve on tridiagonals") {
  rng_stream rng(2718, 0);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 3 + static_cast<int>(rng.below(8));
    std::vector<double> diag(static_cast<size_t>(n)), off(static_cast<size_t>(n - 1));
    for (auto& d : diag) d = rng.uniform01() - 0.5;
    for (auto& o : off) o = 0.5 * rng.uniform01();
    std::vector<std::vector<double>> dense(static_cast<size_t>(n),
                                           std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) dense[static_cast<size_t>(i)][static_cast<size_t>(i)] = diag[static_cast<size_t>(i)];
    for (int i = 0; i + 1 < n; ++i) {
      dense[static_cast<size_t>(i)][static_cast<size_t>(i + 1)] = off[static_cast<size_t>(i)];
      dense[static_cast<size_t>(i + 1)][static_cast<size_t>(i)] = off[static_cast<size_t>(i)];
    }
    auto eig = jacobi_eigenvalues(dense);
    CHECK(tridiagonal_top_eigenvalue(diag, off, -2.0, 2.0) ==
          Catch::Approx(eig.back()).margin(1e-10));
  }
}
