#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "cospect/errors.hpp"
#include "cospect/sparse.hpp"

namespace cospect {

// Power-iterate zeta through a lazy Markov operator, watching the correlation
// sequence a_n = |op^n zeta|^2. Stop at the first n with
//   (a_{n+2} + a_n - 2 a_{n+1}) / a_n < eps^2,
// which equals |op^2 xi_n - xi_n|^2 for the normalized iterate xi_n.
// Failure to stop within the budget is a first-class outcome: it certifies
// that this truncation admits no vector of defect below the observed floor.
struct AlmostInvariantResult {
  std::vector<double> xi;      // normalized op^n zeta for the reported n
  double residual = 0;         // |op^2 xi - xi|, recomputed on the returned vector
  int iterations = 0;          // n at stop, or the budget
  bool stopped = false;
  double best_quantity = 0;    // min over n of the stopping quantity
  std::vector<double> a_ratios;  // a_{n+1}/a_n for diagnostics; all <= 1
};

inline AlmostInvariantResult almost_invariant_from_power(const SparseOperator& op,
                                                         std::vector<double> zeta, double eps,
                                                         int budget = 10000, int workers = 1) {
  require(op.symmetric(), errc::not_symmetric, "operator must be symmetric");
  require(op.dim() == static_cast<int64_t>(zeta.size()), errc::invalid_argument,
          "start vector dimension mismatch");
  require(op.min_diagonal() >= 0.5 - 1e-9, errc::not_lazy,
          "operator must come from a lazy step distribution (diagonal >= 1/2)");
  double n0 = 0;
  for (double x : zeta) n0 += x * x;
  require(std::fabs(std::sqrt(n0) - 1.0) <= 1e-9, errc::invalid_argument,
          "start vector must be a unit vector");

  AlmostInvariantResult res;
  res.best_quantity = std::numeric_limits<double>::infinity();

  // normalized iterates; ratios r_n = a_{n+1}/a_n reconstruct the quantity as
  // r_n r_{n+1} - 2 r_n + 1 without ever underflowing a_n itself
  std::vector<double> v = zeta, w, prev;
  std::vector<double> ratios;
  auto advance = [&](const std::vector<double>& x, std::vector<double>& out) {
    op.apply(x, out, workers);
    double n2 = 0;
    for (double t : out) n2 += t * t;
    double norm = std::sqrt(n2);
    if (norm > 0)
      for (double& t : out) t /= norm;
    return n2;  // = a_{n+1}/a_n when x is the normalized iterate n
  };

  // bootstrap r_0
  double r_prev = advance(v, w);  // w = xi_1, r_prev = r_0
  std::vector<double> xi_n = zeta;  // iterate at index n
  for (int n = 0; n < budget; ++n) {
    std::vector<double> next;
    double r_next = advance(w, next);  // r_{n+1}
    double quantity = r_prev * r_next - 2.0 * r_prev + 1.0;
    ratios.push_back(r_prev);
    if (quantity < res.best_quantity) res.best_quantity = quantity;
    if (quantity < eps * eps) {
      res.xi = xi_n;
      res.iterations = n;
      res.stopped = true;
      break;
    }
    xi_n = w;
    w = std::move(next);
    r_prev = r_next;
    res.iterations = n + 1;
  }
  if (!res.stopped) res.xi = xi_n;  // final iterate; every n obeys the same floor

  // exact residual on the returned vector
  std::vector<double> t1, t2;
  op.apply(res.xi, t1, workers);
  op.apply(t1, t2, workers);
  double r2 = 0;
  for (size_t i = 0; i < res.xi.size(); ++i) {
    double d = t2[i] - res.xi[i];
    r2 += d * d;
  }
  res.residual = std::sqrt(r2);
  res.a_ratios = std::move(ratios);
  return res;
}

}  // namespace cospect
