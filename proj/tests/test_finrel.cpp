#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cospect/fiber.hpp"
#include "cospect/relation.hpp"
#include "cospect/rng.hpp"

using namespace cospect;

namespace {

std::vector<int> random_perm(rng_stream& rng, int n) {
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(p[static_cast<size_t>(i)], p[rng.below(static_cast<uint64_t>(i + 1))]);
  return p;
}

std::vector<int> compose(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[static_cast<size_t>(b[i])];
  return c;
}

// per-point walk oracle: p_{2k,x,S} by dense iteration of the point chain
std::vector<std::vector<double>> pointwise_return_series(int n,
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
      for (int y = 0; y < n; ++y) {
        if (dist[static_cast<size_t>(y)] == 0) continue;
        for (int z = 0; z < n; ++z)
          if (P[static_cast<size_t>(y)][static_cast<size_t>(z)] != 0)
            next[static_cast<size_t>(z)] +=
                dist[static_cast<size_t>(y)] * P[static_cast<size_t>(y)][static_cast<size_t>(z)];
      }
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

FullGroupElement shift_perm(int n, int by) {
  std::vector<int> p(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = ((i + by) % n + n) % n;
  return FullGroupElement{p};
}

}  // namespace

TEST_CASE("orbit relations from permutations") {
  auto four_cycle = build_relation_from_permutations(4, {{1, 2, 3, 0}});
  CHECK(four_cycle.classes_count() == 1);

  auto pairs = build_relation_from_permutations(4, {{1, 0, 3, 2}});
  CHECK(pairs.classes() == std::vector<std::vector<int>>{{0, 1}, {2, 3}});

  auto mixed = build_relation_from_permutations(6, {{1, 2, 0, 3, 4, 5}, {0, 1, 2, 4, 3, 5}});
  CHECK(mixed.classes() == std::vector<std::vector<int>>{{0, 1, 2}, {3, 4}, {5}});

  CHECK_THROWS_AS(build_relation_from_permutations(3, {{0, 0, 1}}), error);
}

TEST_CASE("ergodic components are the classes; empty relation gives singletons") {
  auto one = build_relation_from_permutations(4, {{1, 2, 3, 0}});
  CHECK(ergodic_components(one).size() == 1);
  auto two = build_relation_from_permutations(4, {{1, 0, 3, 2}});
  CHECK(ergodic_components(two).size() == 2);
  auto none = build_relation_from_permutations(5, {});
  CHECK(ergodic_components(none).size() == 5);
}

TEST_CASE("mass transport: exact equality on both sides") {
  auto diag = build_relation_from_permutations(3, {});
  auto [l1, r1] = mass_transport_check(diag, [](int, int) { return 1.0; });
  CHECK(l1 == 1.0);
  CHECK(r1 == 1.0);

  auto tri = build_relation_from_permutations(3, {{1, 2, 0}});
  auto [l2, r2] = mass_transport_check(tri, [](int, int) { return 1.0; });
  CHECK(l2 == 3.0);
  CHECK(r2 == 3.0);

  rng_stream rng(555, 0);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng.below(63));
    std::vector<std::vector<int>> perms;
    int np = 1 + static_cast<int>(rng.below(2));
    for (int i = 0; i < np; ++i) perms.push_back(random_perm(rng, n));
    auto R = build_relation_from_permutations(n, perms);
    std::vector<double> values(static_cast<size_t>(n) * static_cast<size_t>(n));
    for (auto& v : values) v = rng.uniform01();
    auto f = [&](int x, int y) {
      return values[static_cast<size_t>(x) * static_cast<size_t>(n) + static_cast<size_t>(y)];
    };
    auto [lhs, rhs] = mass_transport_check(R, f);
    CHECK(std::fabs(lhs - rhs) <= 1e-12);
  }
}

TEST_CASE("fiber space: sizes and measure totals") {
  auto R1 = build_relation_from_permutations(4, {{1, 2, 3, 0}});
  auto S1 = build_relation_from_permutations(4, {{1, 0, 3, 2}});  // {{0,1},{2,3}}
  auto fib = fiber_space(R1, S1);
  CHECK(fib.size() == 8);
  CHECK(fib.total_measure() == Catch::Approx(2.0));

  auto same = fiber_space(R1, R1);
  CHECK(same.size() == 4);
  CHECK(same.total_measure() == Catch::Approx(1.0));

  auto trivial = build_relation_from_permutations(4, {});
  auto full = fiber_space(R1, trivial);
  CHECK(full.size() == 16);
  CHECK(full.total_measure() == Catch::Approx(4.0));

  // S must refine R
  auto other = build_relation_from_permutations(4, {{2, 3, 0, 1}});  // {{0,2},{1,3}}
  auto R2 = build_relation_from_permutations(4, {{1, 0, 3, 2}});
  CHECK_THROWS_AS(fiber_space(R2, other), error);
}

TEST_CASE("lambda_nu: identity atom gives the identity matrix") {
  auto R = build_relation_from_permutations(4, {{1, 2, 3, 0}});
  auto S = build_relation_from_permutations(4, {{2, 3, 0, 1}});
  auto fib = fiber_space(R, S);
  std::vector<int> id = {0, 1, 2, 3};
  auto op = lambda_nu_matrix(fib, {{FullGroupElement{id}, 1.0}});
  CHECK(op.dim() == fib.size());
  for (int64_t i = 0; i < op.dim(); ++i) CHECK(op.entry(i, i) == 1.0);
  CHECK(op.nnz() == op.dim());
}

TEST_CASE("lambda_nu on the 4-cycle with S = {{0,2},{1,3}}: norm 1, symmetric") {
  auto R = build_relation_from_permutations(4, {{1, 2, 3, 0}});
  auto S = build_relation_from_permutations(4, {{2, 3, 0, 1}});
  auto fib = fiber_space(R, S);
  REQUIRE(fib.size() == 8);

  auto op = lambda_nu_matrix(fib, {{shift_perm(4, 1), 0.5}, {shift_perm(4, -1), 0.5}});
  CHECK(op.symmetry_defect() == 0.0);
  CHECK(op.max_row_sum() == Catch::Approx(1.0));
  CHECK(operator_norm(op, 1e-13, 20000).value == Catch::Approx(1.0).margin(1e-9));

  auto op2 = lambda_nu_matrix(fib, {{shift_perm(4, 2), 1.0}});  // shift^2 is an involution
  CHECK(op2.symmetry_defect() == 0.0);
  CHECK(operator_norm(op2, 1e-13, 20000).value == Catch::Approx(1.0).margin(1e-9));

  // not in the full group: the 4-shift leaves the classes of a split relation
  auto Rsplit = build_relation_from_permutations(4, {{1, 0, 3, 2}});
  auto fib2 = fiber_space(Rsplit, build_relation_from_permutations(4, {}));
  CHECK_THROWS_AS(lambda_nu_matrix(fib2, {{shift_perm(4, 1), 0.5}, {shift_perm(4, -1), 0.5}}),
                  error);

  // asymmetric atoms
  CHECK_THROWS_AS(lambda_nu_matrix(fib, {{shift_perm(4, 1), 1.0}}), error);
}

TEST_CASE("zeta_E: support and normalization") {
  auto R = build_relation_from_permutations(4, {{1, 2, 3, 0}});

  // S = R, E = X: constant one on the diagonal pairs
  auto same = fiber_space(R, R);
  auto zX = zeta_E(same, {0, 1, 2, 3});
  for (double v : zX) CHECK(v == 1.0);

  // 4-cycle with S = {{0,2},{1,3}}, E = {0,1}
  auto S = build_relation_from_permutations(4, {{2, 3, 0, 1}});
  auto fib = fiber_space(R, S);
  auto z = zeta_E(fib, {0, 1});
  CHECK(fib.norm(z) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(z[static_cast<size_t>(fib.diagonal_index(0))] == Catch::Approx(std::sqrt(2.0)));
  CHECK(z[static_cast<size_t>(fib.diagonal_index(1))] == Catch::Approx(std::sqrt(2.0)));
  int nonzero = 0;
  for (double v : z)
    if (v != 0) ++nonzero;
  CHECK(nonzero == 2);

  // one point with trivial S: single support pair of value sqrt(n)
  auto full = fiber_space(R, build_relation_from_permutations(4, {}));
  auto z1 = zeta_E(full, {2});
  CHECK(z1[static_cast<size_t>(full.diagonal_index(2))] == Catch::Approx(2.0));

  CHECK_THROWS_AS(zeta_E(fib, {}), error);
}

TEST_CASE("restricted series: constant for eigenvectors, increasing toward 1 on the 4-cycle") {
  auto R = build_relation_from_permutations(4, {{1, 2, 3, 0}});
  auto S = build_relation_from_permutations(4, {{2, 3, 0, 1}});
  auto fib = fiber_space(R, S);

  // identity operator: s_k = 1
  std::vector<SparseOperator::Triplet> idt;
  for (int64_t i = 0; i < fib.size(); ++i) idt.emplace_back(i, i, 1.0);
  auto I = SparseOperator::from_triplets(fib.size(), idt, true);
  auto zX = zeta_E(fib, {0, 1, 2, 3});
  auto flat = restricted_norm_series(fib, I, zX, 10);
  for (double s : flat.s_k) CHECK(s == Catch::Approx(1.0));

  // eigenvector with eigenvalue 0.6: s_k = 0.6 for all k
  std::vector<SparseOperator::Triplet> sc;
  for (int64_t i = 0; i < fib.size(); ++i) sc.emplace_back(i, i, 0.6);
  auto scaled = SparseOperator::from_triplets(fib.size(), sc, true);
  auto eigenflat = restricted_norm_series(fib, scaled, zX, 8);
  for (double s : eigenflat.s_k) CHECK(s == Catch::Approx(0.6));

  // uniform shift nu, E = {0,1}: increasing toward 1
  auto op = lambda_nu_matrix(fib, {{shift_perm(4, 1), 0.5}, {shift_perm(4, -1), 0.5}});
  auto zE = zeta_E(fib, {0, 1});
  auto series = restricted_norm_series(fib, op, zE, 30);
  for (size_t k = 1; k < series.s_k.size(); ++k) CHECK(series.s_k[k] >= series.s_k[k - 1] - 1e-12);
  CHECK(series.s_k.back() >= 0.9);
}

TEST_CASE("R(1_E) rejects non-saturated sets and caps the masked norm") {
  auto R = build_relation_from_permutations(4, {{1, 2, 3, 0}});
  auto S = build_relation_from_permutations(4, {{2, 3, 0, 1}});  // classes {0,2},{1,3}
  auto fib = fiber_space(R, S);
  CHECK_THROWS_AS(FiberProjection(fib, {0, 1}), error);  // not S-saturated

  FiberProjection proj(fib, {0, 2});  // one full S-class
  auto op = lambda_nu_matrix(fib, {{shift_perm(4, 1), 0.5}, {shift_perm(4, -1), 0.5}});
  auto zE = zeta_E(fib, {0, 2});
  auto series = restricted_norm_series(fib, op, zE, 20, &proj);
  CHECK(series.masked_norm <= 1.0 + 1e-9);
  CHECK(series.masked_norm >= series.s_k.back() - 1e-9);  // norm dominates the series
}

TEST_CASE("fiberwise normalization: postcondition, zero vector, idempotence") {
  auto R = build_relation_from_permutations(6, {{1, 2, 3, 4, 5, 0}});
  auto S = build_relation_from_permutations(6, {{2, 3, 4, 5, 0, 1}});
  auto fib = fiber_space(R, S);

  auto fiber_norms_unit = [&](const std::vector<double>& v) {
    for (int x = 0; x < fib.points(); ++x) {
      double n2 = 0;
      for (int i = fib.fiber_begin(x); i < fib.fiber_end(x); ++i)
        n2 += v[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
      if (std::fabs(std::sqrt(n2) - 1.0) > 1e-12) return false;
    }
    return true;
  };

  // already fiberwise unit: unchanged
  std::vector<double> unit(static_cast<size_t>(fib.size()), 0.0);
  for (int x = 0; x < fib.points(); ++x) unit[static_cast<size_t>(fib.diagonal_index(x))] = 1.0;
  CHECK(fiberwise_normalize(fib, unit) == unit);

  // zero vector falls back to the diagonal section
  std::vector<double> zero(static_cast<size_t>(fib.size()), 0.0);
  auto diag = fiberwise_normalize(fib, zero);
  CHECK(fiber_norms_unit(diag));
  CHECK(diag == unit);

  // random vectors: unit fibers, idempotent
  rng_stream rng(9, 9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(static_cast<size_t>(fib.size()));
    for (auto& x : v) x = rng.uniform01() - 0.3;
    auto w = fiberwise_normalize(fib, v);
    CHECK(fiber_norms_unit(w));
    CHECK(fiberwise_normalize(fib, w) == w);
  }
}

TEST_CASE("trace identity: fiber correlations equal averaged pointwise returns") {
  rng_stream rng(31337, 1);
  for (int trial = 0; trial < 8; ++trial) {
    int n = 4 + static_cast<int>(rng.below(20));
    auto g1 = random_perm(rng, n);
    auto g2 = random_perm(rng, n);
    auto R = build_relation_from_permutations(n, {g1, g2});
    auto S = build_relation_from_permutations(n, {compose(g1, g1)});
    REQUIRE(S.refines(R));
    auto fib = fiber_space(R, S);

    auto inv = [&](const std::vector<int>& p) { return FullGroupElement{p}.inverse(); };
    std::vector<FullGroupAtom> atoms = {{FullGroupElement{g1}, 0.25},
                                        {FullGroupElement{inv(g1)}, 0.25},
                                        {FullGroupElement{g2}, 0.25},
                                        {FullGroupElement{inv(g2)}, 0.25}};
    auto op = lambda_nu_matrix(fib, atoms);
    CHECK(op.symmetry_defect() <= 1e-15);

    std::vector<int> all(static_cast<size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    auto xi0 = zeta_E(fib, all);

    int K = 25;
    auto pointwise = pointwise_return_series(n, atoms, S, K);
    std::vector<double> v = xi0, tmp;
    for (int k = 1; k <= K; ++k) {
      op.apply(v, tmp);
      op.apply(tmp, v);
      double corr = fib.ip(v, xi0);
      double avg = 0;
      for (int x = 0; x < n; ++x)
        avg += pointwise[static_cast<size_t>(k - 1)][static_cast<size_t>(x)];
      avg /= n;
      REQUIRE(std::fabs(corr - avg) <= 1e-10);
    }
  }
}

TEST_CASE("tfae witnesses: finite stochastic operators certify quickly") {
  auto R = build_relation_from_permutations(4, {{1, 2, 3, 0}});
  auto S = build_relation_from_permutations(4, {{2, 3, 0, 1}});
  auto fib = fiber_space(R, S);
  std::vector<FullGroupAtom> atoms = {{shift_perm(4, 1), 0.5}, {shift_perm(4, -1), 0.5}};

  auto rep = tfae_witnesses(fib, atoms, 0.05, 5000);
  CHECK(rep.stopped);
  CHECK(rep.l2_residual <= 0.05 + 1e-9);
  for (size_t i = 0; i < rep.reiter_l1.size(); ++i) {
    CHECK(rep.reiter_l1[i] <= rep.reiter_l1_bound[i] + 1e-12);  // Cauchy-Schwarz
    CHECK(rep.fiberwise_residuals[i] <= 0.2);
  }

  // S = R: the diagonal fiber is a fixed point: residuals are zero immediately
  auto same = fiber_space(R, R);
  auto rep2 = tfae_witnesses(same, atoms, 0.05, 100);
  CHECK(rep2.stopped);
  CHECK(rep2.iterations == 0);
  CHECK(rep2.l2_residual <= 1e-12);
  for (double r : rep2.reiter_l1) CHECK(r <= 1e-12);
}

TEST_CASE("masked norms never exceed the full norm on random models") {
  rng_stream rng(424243, 0);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 6 + static_cast<int>(rng.below(18));
    auto g1 = random_perm(rng, n), g2 = random_perm(rng, n);
    auto R = build_relation_from_permutations(n, {g1, g2});
    auto S = build_relation_from_permutations(n, {compose(g1, compose(g1, g1))});
    auto fib = fiber_space(R, S);
    auto inv = [](const std::vector<int>& p) {
      return FullGroupElement{FullGroupElement{p}.inverse()};
    };
    std::vector<FullGroupAtom> atoms = {{FullGroupElement{g1}, 0.25},
                                        {inv(g1), 0.25},
                                        {FullGroupElement{g2}, 0.25},
                                        {inv(g2), 0.25}};
    auto op = lambda_nu_matrix(fib, atoms);
    double full = operator_norm(op, 1e-12, 50000).value;
    CHECK(full <= 1.0 + 1e-9);

    // E = the S-saturation of point 0
    std::vector<int> E;
    for (int x = 0; x < n; ++x)
      if (S.related(0, x)) E.push_back(x);
    FiberProjection proj(fib, E);
    auto zE = zeta_E(fib, E);
    auto series = restricted_norm_series(fib, op, zE, 15, &proj);
    CHECK(series.masked_norm <= full + 1e-9);
    for (double s : series.s_k) CHECK(s <= 1.0 + 1e-12);
  }
}
