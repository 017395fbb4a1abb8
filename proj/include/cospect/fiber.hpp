#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "cospect/errors.hpp"
#include "cospect/invariant.hpp"
#include "cospect/relation.hpp"
#include "cospect/sparse.hpp"

namespace cospect {

// The fiber space R/S of an exact finite inclusion S <= R: pairs (x, c) with
// c an S-class inside [x]_R, carrying weight 1/n each. mu_{R/S}(whole) =
// (1/n) sum_x |[x]_R / S|, typically bigger than one.
class FiberSpace {
public:
  struct Pair {
    int x;
    int s_class;
  };

  FiberSpace(FiniteRelation R, FiniteRelation S) : R_(std::move(R)), S_(std::move(S)) {
    require(S_.n == R_.n, errc::not_a_subrelation, "point counts differ");
    require(S_.refines(R_), errc::not_a_subrelation, "every S-class must sit inside an R-class");
    n_ = R_.n;

    // S-classes present in each R-class
    int m = S_.classes_count();
    std::vector<int> s_to_r(static_cast<size_t>(m), -1);
    for (int x = 0; x < n_; ++x) s_to_r[static_cast<size_t>(S_.class_id[static_cast<size_t>(x)])] =
        R_.class_id[static_cast<size_t>(x)];
    std::vector<std::vector<int>> r_fiber(static_cast<size_t>(R_.classes_count()));
    for (int c = 0; c < m; ++c) r_fiber[static_cast<size_t>(s_to_r[static_cast<size_t>(c)])].push_back(c);

    fiber_offset_.assign(static_cast<size_t>(n_) + 1, 0);
    for (int x = 0; x < n_; ++x) {
      const auto& fib = r_fiber[static_cast<size_t>(R_.class_id[static_cast<size_t>(x)])];
      fiber_offset_[static_cast<size_t>(x) + 1] =
          fiber_offset_[static_cast<size_t>(x)] + static_cast<int>(fib.size());
      for (int c : fib) pairs_.push_back({x, c});
    }
  }

  int points() const { return n_; }
  int64_t size() const { return static_cast<int64_t>(pairs_.size()); }
  const std::vector<Pair>& pairs() const { return pairs_; }
  const FiniteRelation& relation() const { return R_; }
  const FiniteRelation& subrelation() const { return S_; }
  double weight() const { return 1.0 / n_; }
  double total_measure() const { return static_cast<double>(size()) / n_; }

  int fiber_begin(int x) const { return fiber_offset_[static_cast<size_t>(x)]; }
  int fiber_end(int x) const { return fiber_offset_[static_cast<size_t>(x) + 1]; }
  int fiber_size(int x) const { return fiber_end(x) - fiber_begin(x); }

  int64_t pair_index(int x, int s_class) const {
    for (int i = fiber_begin(x); i < fiber_end(x); ++i)
      if (pairs_[static_cast<size_t>(i)].s_class == s_class) return i;
    raise(errc::index_out_of_range, "S-class not in this fiber");
  }

  // diagonal pair (x, [x]_S)
  int64_t diagonal_index(int x) const {
    return pair_index(x, S_.class_id[static_cast<size_t>(x)]);
  }

  // weighted inner product of mu_{R/S}
  double ip(const std::vector<double>& u, const std::vector<double>& v) const {
    long double acc = 0, comp = 0;
    for (size_t i = 0; i < u.size(); ++i) {
      long double y = static_cast<long double>(u[i]) * v[i] - comp;
      long double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
    }
    return static_cast<double>(acc) * weight();
  }

  double norm(const std::vector<double>& u) const { return std::sqrt(std::max(0.0, ip(u, u))); }

private:
  FiniteRelation R_;
  FiniteRelation S_;
  int n_ = 0;
  std::vector<Pair> pairs_;
  std::vector<int> fiber_offset_;
};

inline FiberSpace fiber_space(const FiniteRelation& R, const FiniteRelation& S) {
  return FiberSpace(R, S);
}

using FullGroupAtom = std::pair<FullGroupElement, double>;

inline void require_symmetric_atoms(const std::vector<FullGroupAtom>& atoms) {
  double total = 0;
  for (const auto& [g, p] : atoms) {
    require(p >= 0, errc::invalid_argument, "negative probability");
    total += p;
    auto inv = g.inverse();
    bool found = false;
    for (const auto& [h, q] : atoms)
      if (h.perm == inv && std::fabs(q - p) <= 1e-12) {
        found = true;
        break;
      }
    require(found, errc::not_symmetric, "atom inverse missing or carries different mass");
  }
  require(std::fabs(total - 1.0) <= 1e-12, errc::invalid_argument, "atom masses must sum to 1");
}

// lambda_{R/S}(nu) = sum nu(gamma) lambda(gamma) acting by
// (lambda(gamma) xi)(x,c) = xi(gamma^{-1} x, c): moves the point within its
// R-class, fixes the S-class coordinate. Permutation matrix per atom, so the
// sum is doubly substochastic and symmetric for symmetric nu.
inline SparseOperator lambda_nu_matrix(const FiberSpace& fiber,
                                       const std::vector<FullGroupAtom>& atoms) {
  require_symmetric_atoms(atoms);
  const auto& R = fiber.relation();
  std::vector<SparseOperator::Triplet> entries;
  for (const auto& [gamma, p] : atoms) {
    FullGroupElement::checked(R, gamma.perm);  // gamma in [R]
    auto inv = gamma.inverse();
    for (int64_t i = 0; i < fiber.size(); ++i) {
      const auto& pr = fiber.pairs()[static_cast<size_t>(i)];
      int y = inv[static_cast<size_t>(pr.x)];  // gamma^{-1} x
      entries.emplace_back(i, fiber.pair_index(y, pr.s_class), p);
    }
  }
  return SparseOperator::from_triplets(fiber.size(), std::move(entries), true);
}

// zeta_E(x,c) = mu(E)^{-1/2} 1_{x in c and x in E}: supported on diagonal
// pairs over E, unit vector in L^2(mu_{R/S}).
inline std::vector<double> zeta_E(const FiberSpace& fiber, const std::vector<int>& E) {
  require(!E.empty(), errc::empty_set, "E must be nonempty");
  double muE = static_cast<double>(E.size()) / fiber.points();
  std::vector<double> z(static_cast<size_t>(fiber.size()), 0.0);
  for (int x : E) {
    require(x >= 0 && x < fiber.points(), errc::index_out_of_range, "point outside {0..n-1}");
    z[static_cast<size_t>(fiber.diagonal_index(x))] = 1.0 / std::sqrt(muE);
  }
  double nrm = fiber.norm(z);
  require(std::fabs(nrm - 1.0) <= 1e-12, errc::invalid_argument, "zeta_E should be unit");
  return z;
}

// R(1_E) for S-invariant E: keep the pairs whose class is contained in E.
// Rejects non-saturated sets rather than silently saturating them.
class FiberProjection {
public:
  FiberProjection(const FiberSpace& fiber, const std::vector<int>& E) {
    const auto& S = fiber.subrelation();
    std::vector<char> inE(static_cast<size_t>(fiber.points()), 0);
    for (int x : E) {
      require(x >= 0 && x < fiber.points(), errc::index_out_of_range, "point outside {0..n-1}");
      inE[static_cast<size_t>(x)] = 1;
    }
    for (int x = 0; x < fiber.points(); ++x)
      for (int y = x + 1; y < fiber.points(); ++y)
        if (S.related(x, y))
          require(inE[static_cast<size_t>(x)] == inE[static_cast<size_t>(y)], errc::not_saturated,
                  "E must be a union of S-classes");
    std::vector<char> class_in(static_cast<size_t>(S.classes_count()), 0);
    for (int x = 0; x < fiber.points(); ++x)
      if (inE[static_cast<size_t>(x)])
        class_in[static_cast<size_t>(S.class_id[static_cast<size_t>(x)])] = 1;
    mask_.resize(static_cast<size_t>(fiber.size()));
    for (int64_t i = 0; i < fiber.size(); ++i)
      mask_[static_cast<size_t>(i)] =
          class_in[static_cast<size_t>(fiber.pairs()[static_cast<size_t>(i)].s_class)];
  }

  void apply(std::vector<double>& v) const {
    for (size_t i = 0; i < v.size(); ++i)
      if (!mask_[i]) v[i] = 0;
  }

  const std::vector<char>& mask() const { return mask_; }

private:
  std::vector<char> mask_;
};

struct RestrictedSeries {
  std::vector<double> s_k;            // <op^{2k} zeta, zeta>^{1/2k}
  double masked_norm = -1;            // |R(1_E) op| when a projection is given
};

// s_k converges (from either side) to the restricted cospectral radius; the
// masked operator norm equals the same limit by the restricted norm identity.
inline RestrictedSeries restricted_norm_series(const FiberSpace& fiber, const SparseOperator& op,
                                               const std::vector<double>& zeta, int K,
                                               const FiberProjection* projection = nullptr) {
  require(op.dim() == fiber.size(), errc::invalid_argument, "operator/fiber mismatch");
  require(std::fabs(fiber.norm(zeta) - 1.0) <= 1e-9, errc::invalid_argument,
          "zeta must be a unit vector");
  RestrictedSeries out;
  std::vector<double> v = zeta, tmp;
  for (int k = 1; k <= K; ++k) {
    op.apply(v, tmp);
    op.apply(tmp, v);
    double corr = fiber.ip(v, zeta);
    out.s_k.push_back(corr > 0 ? std::pow(corr, 1.0 / (2.0 * k)) : 0.0);
  }
  if (projection) {
    auto masked_apply = [&](const std::vector<double>& x, std::vector<double>& y) {
      std::vector<double> xm = x;
      projection->apply(xm);
      op.apply(xm, y);
      projection->apply(y);
    };
    NormEstimate est = detail::power_norm(masked_apply, op.dim(), 1e-13, 20000);
    out.masked_norm = est.value;
  }
  return out;
}

// Fiberwise renormalization: v_x = xi_x / |xi_x| where the fiber norm is at
// least 1/2, and the diagonal section 1_{x in c} elsewhere. Output fibers are
// exactly unit; idempotent.
inline std::vector<double> fiberwise_normalize(const FiberSpace& fiber,
                                               const std::vector<double>& xi) {
  require(static_cast<int64_t>(xi.size()) == fiber.size(), errc::invalid_argument,
          "vector/fiber mismatch");
  std::vector<double> v(xi.size(), 0.0);
  for (int x = 0; x < fiber.points(); ++x) {
    double n2 = 0;
    for (int i = fiber.fiber_begin(x); i < fiber.fiber_end(x); ++i)
      n2 += xi[static_cast<size_t>(i)] * xi[static_cast<size_t>(i)];
    double fx = std::sqrt(n2);
    if (std::fabs(fx - 1.0) <= 1e-12) {
      for (int i = fiber.fiber_begin(x); i < fiber.fiber_end(x); ++i)
        v[static_cast<size_t>(i)] = xi[static_cast<size_t>(i)];
    } else if (fx >= 0.5) {
      for (int i = fiber.fiber_begin(x); i < fiber.fiber_end(x); ++i)
        v[static_cast<size_t>(i)] = xi[static_cast<size_t>(i)] / fx;
    } else {
      v[static_cast<size_t>(fiber.diagonal_index(x))] = 1.0;
    }
  }
  return v;
}

struct TfaeReport {
  bool stopped = false;
  int iterations = 0;
  double l2_residual = 0;                  // |op^2 xi - xi| at the reported iterate
  std::vector<double> reiter_l1;           // |lambda(gamma) f - f|_1 per atom, f = |xi|^2
  std::vector<double> reiter_l1_bound;     // 2 |lambda(gamma) xi - xi|_2 (Cauchy-Schwarz)
  std::vector<double> fiberwise_residuals; // |lambda(gamma) v - v|_2 for the normalized v
  double best_quantity = 0;                // floor certificate when the rule never fires
};

// Runs the almost-invariant construction from zeta_X on the lazy operator and
// converts the witness along the standard chain: L^2 vector -> L^1 Reiter
// function -> fiberwise unit vector, reporting every residual.
inline TfaeReport tfae_witnesses(const FiberSpace& fiber, const std::vector<FullGroupAtom>& atoms,
                                 double eps, int budget = 10000) {
  require_symmetric_atoms(atoms);

  // theta = nu/2 + delta_id/2
  std::vector<FullGroupAtom> lazy;
  std::vector<int> id(static_cast<size_t>(fiber.points()));
  for (int i = 0; i < fiber.points(); ++i) id[static_cast<size_t>(i)] = i;
  bool merged = false;
  for (const auto& [g, p] : atoms) {
    if (g.perm == id) {
      lazy.emplace_back(g, p / 2 + 0.5);
      merged = true;
    } else {
      lazy.emplace_back(g, p / 2);
    }
  }
  if (!merged) lazy.emplace_back(FullGroupElement{id}, 0.5);

  SparseOperator op = lambda_nu_matrix(fiber, lazy);
  std::vector<int> all(static_cast<size_t>(fiber.points()));
  for (int i = 0; i < fiber.points(); ++i) all[static_cast<size_t>(i)] = i;
  std::vector<double> zeta = zeta_E(fiber, all);

  // the invariant engine works in the plain euclidean norm; rescale
  double plain = 0;
  for (double z : zeta) plain += z * z;
  for (double& z : zeta) z /= std::sqrt(plain);

  auto inv = almost_invariant_from_power(op, zeta, eps, budget);

  TfaeReport rep;
  rep.stopped = inv.stopped;
  rep.iterations = inv.iterations;
  rep.l2_residual = inv.residual;
  rep.best_quantity = inv.best_quantity;

  // weighted-normalized witness
  std::vector<double> xi = inv.xi;
  double nrm = fiber.norm(xi);
  for (double& x : xi) x /= nrm;

  auto lambda_apply = [&](const FullGroupElement& g, const std::vector<double>& u) {
    auto ginv = g.inverse();
    std::vector<double> out(u.size(), 0.0);
    for (int64_t i = 0; i < fiber.size(); ++i) {
      const auto& pr = fiber.pairs()[static_cast<size_t>(i)];
      out[static_cast<size_t>(i)] =
          u[static_cast<size_t>(fiber.pair_index(ginv[static_cast<size_t>(pr.x)], pr.s_class))];
    }
    return out;
  };

  std::vector<double> f(xi.size());
  for (size_t i = 0; i < xi.size(); ++i) f[i] = xi[i] * xi[i];  // Reiter function, |f|_1 = 1

  std::vector<double> v = fiberwise_normalize(fiber, xi);
  double vnorm = fiber.norm(v);

  for (const auto& [g, p] : atoms) {
    auto gf = lambda_apply(g, f);
    long double l1 = 0;
    for (size_t i = 0; i < f.size(); ++i) l1 += std::fabs(gf[i] - f[i]);
    rep.reiter_l1.push_back(static_cast<double>(l1) * fiber.weight());

    auto gxi = lambda_apply(g, xi);
    double d2 = 0;
    for (size_t i = 0; i < xi.size(); ++i) d2 += (gxi[i] - xi[i]) * (gxi[i] - xi[i]);
    rep.reiter_l1_bound.push_back(2.0 * std::sqrt(d2 * fiber.weight()));

    auto gv = lambda_apply(g, v);
    double dv = 0;
    for (size_t i = 0; i < v.size(); ++i) dv += (gv[i] - v[i]) * (gv[i] - v[i]);
    rep.fiberwise_residuals.push_back(std::sqrt(dv * fiber.weight()) / vnorm);
  }
  return rep;
}

}  // namespace cospect
