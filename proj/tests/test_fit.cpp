#include <catch2/catch_amalgamated.hpp>

#include "cospect/fit.hpp"
#include "cospect/radial.hpp"

using namespace cospect;

namespace {

// exact central binomial series C(2k,k)/4^k by recurrence
std::vector<double> z_return_series(int K) {
  std::vector<double> p(static_cast<size_t>(K));
  double cur = 0.5;  // k = 1: C(2,1)/4 = 1/2
  p[0] = cur;
  for (int k = 1; k < K; ++k) {
    cur *= (2.0 * k + 1.0) / (2.0 * k + 2.0);
    p[static_cast<size_t>(k)] = cur;
  }
  return p;
}

}  // namespace

TEST_CASE("exact geometric series recovers its rate to machine precision") {
  std::vector<double> p;
  for (int k = 1; k <= 40; ++k) p.push_back(std::pow(0.5, 2 * k));
  for (auto model : {FitModel::loglinear, FitModel::ratio}) {
    auto est = fit_radius(p, 5, 40, model);
    CHECK(est.value == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(est.stderr_value <= 1e-10);
  }
}

TEST_CASE("Z series with the polynomial correction fits to at least 0.995") {
  auto p = z_return_series(50);
  auto est = fit_radius(p, 10, 50, FitModel::loglinear_polycorrected);
  CHECK(est.value >= 0.995);
  CHECK(est.value <= 1.0);
}

TEST_CASE("exact F2 series fits within 0.005 of the eigen bound") {
  auto oracle = radial_oracle_free(2, 200, 10000);
  auto est = fit_radius(oracle.p2k, 50, 200, FitModel::loglinear_polycorrected);
  CHECK(std::fabs(est.value - oracle.eigen_bound) <= 0.005);
  CHECK(oracle.eigen_bound == Catch::Approx(std::sqrt(3.0) / 2.0).margin(1e-5));
}

TEST_CASE("window validation and zero handling") {
  std::vector<double> p = {0.5, 0.25, 0.125, 0.0, 0.0};
  CHECK_THROWS_AS(fit_radius(p, 1, 2, FitModel::loglinear), error);        // too short
  CHECK_THROWS_AS(fit_radius(p, 2, 5, FitModel::loglinear), error);        // 2 positive points
  auto est = fit_radius(p, 1, 5, FitModel::loglinear);                     // positive prefix of 3
  CHECK(est.truncated);
  CHECK(est.k_hi == 3);
  CHECK(est.value == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-9));   // halves per k
  CHECK_THROWS_AS(fit_radius(p, 1, 6, FitModel::loglinear), error);        // outside grid
}

TEST_CASE("growing series clamps to 1 and flags it") {
  std::vector<double> p;
  for (int k = 1; k <= 12; ++k) p.push_back(0.1 * k);
  auto est = fit_radius(p, 1, 12, FitModel::loglinear);
  CHECK(est.value == 1.0);
  CHECK(est.clamped);
}

TEST_CASE("delazify inverts the lazy affine map") {
  CHECK(delazify(1.0) == 1.0);
  CHECK(delazify((1.0 + std::sqrt(3.0) / 2.0) / 2.0) ==
        Catch::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  CHECK(delazify(0.3) == 0.0);  // clamped at zero
}
