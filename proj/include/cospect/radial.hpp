#pragma once

#include <cmath>
#include <vector>

#include "cospect/errors.hpp"

namespace cospect {

// Birth-death chains on {0..R} that lump distance-from-root walks exactly.
// For the uniform walk on the free group F_k the distance process moves up
// with probability (2k-1)/2k and down with 1/2k (up with probability 1 at
// the root); even-time mass at 0 reproduces the return series exactly.

struct BirthDeathChain {
  std::vector<double> up;    // up[d] = P(d -> d+1)
  std::vector<double> down;  // down[d] = P(d -> d-1), down[0] unused
  std::vector<double> stay;  // loops

  int length() const { return static_cast<int>(up.size()); }
};

inline BirthDeathChain free_group_radial_chain(int rank, int R) {
  BirthDeathChain c;
  c.up.assign(static_cast<size_t>(R) + 1, 0);
  c.down.assign(static_cast<size_t>(R) + 1, 0);
  c.stay.assign(static_cast<size_t>(R) + 1, 0);
  double q = 1.0 / (2.0 * rank);
  c.up[0] = 1.0;
  for (int d = 1; d <= R; ++d) {
    c.down[static_cast<size_t>(d)] = q;
    c.up[static_cast<size_t>(d)] = 1.0 - q;
  }
  return c;
}

// Right-coset walk of <a> <= F_k under the uniform step: the a-edges loop at
// the root, so the root stays with probability 1/k and the bulk behaves like
// the free-group chain.
inline BirthDeathChain cyclic_in_free_radial_chain(int rank, int R) {
  BirthDeathChain c = free_group_radial_chain(rank, R);
  c.stay[0] = 1.0 / rank;
  c.up[0] = 1.0 - 1.0 / rank;
  return c;
}

// Exact even-time occupation of state 0 for the first K half-steps.
inline std::vector<double> chain_return_series(const BirthDeathChain& chain, int K) {
  int R = chain.length() - 1;
  require(R >= 2 * K, errc::r_too_small, "chain length must be at least 2K");
  std::vector<double> dist(static_cast<size_t>(R) + 1, 0.0), next(dist);
  dist[0] = 1.0;
  std::vector<double> p2k(static_cast<size_t>(K), 0.0);
  for (int t = 1; t <= 2 * K; ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int d = 0; d <= R; ++d) {
      double m = dist[static_cast<size_t>(d)];
      if (m == 0) continue;
      if (chain.stay[static_cast<size_t>(d)] > 0)
        next[static_cast<size_t>(d)] += m * chain.stay[static_cast<size_t>(d)];
      if (d > 0) next[static_cast<size_t>(d - 1)] += m * chain.down[static_cast<size_t>(d)];
      if (d < R) next[static_cast<size_t>(d + 1)] += m * chain.up[static_cast<size_t>(d)];
    }
    dist.swap(next);
    if ((t & 1) == 0) p2k[static_cast<size_t>(t / 2 - 1)] = dist[0];
  }
  return p2k;
}

namespace detail {

// eigenvalue count of (T - x I) below zero via the LDL^T pivot recursion
inline int sturm_count_below(const std::vector<double>& diag, const std::vector<double>& offdiag,
                             double x) {
  int count = 0;
  double d = diag[0] - x;
  if (d < 0) ++count;
  for (size_t i = 1; i < diag.size(); ++i) {
    double denom = (d == 0) ? 1e-300 : d;
    d = (diag[i] - x) - offdiag[i - 1] * offdiag[i - 1] / denom;
    if (d < 0) ++count;
  }
  return count;
}

}  // namespace detail

// Top eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
inline double tridiagonal_top_eigenvalue(const std::vector<double>& diag,
                                         const std::vector<double>& offdiag, double lo = -1.0,
                                         double hi = 1.0) {
  int n = static_cast<int>(diag.size());
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    if (detail::sturm_count_below(diag, offdiag, mid) < n)
      lo = mid;  // some eigenvalue is >= mid
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Symmetrize the chain (conjugate by the sqrt of its stationary weights);
// the transition operator and the symmetrized matrix share their spectrum.
inline double chain_top_eigenvalue(const BirthDeathChain& chain) {
  int R = chain.length() - 1;
  std::vector<double> diag(chain.stay.begin(), chain.stay.end());
  std::vector<double> off(static_cast<size_t>(R), 0.0);
  for (int d = 0; d < R; ++d)
    off[static_cast<size_t>(d)] =
        std::sqrt(chain.up[static_cast<size_t>(d)] * chain.down[static_cast<size_t>(d) + 1]);
  return tridiagonal_top_eigenvalue(diag, off);
}

struct RadialOracle {
  std::vector<double> p2k;  // exact, k = 1..K
  double eigen_bound = 0;   // top eigenvalue of the length-R chain, -> sqrt(2k-1)/k
  int rank = 0;
  int chain_length = 0;
};

// Independent oracle for the free-group spectral radius with uniform nu.
inline RadialOracle radial_oracle_free(int rank, int K, int R) {
  require(rank >= 2, errc::invalid_argument, "radial oracle needs free rank >= 2");
  require(K >= 1, errc::invalid_argument, "K must be >= 1");
  require(R >= 2 * K, errc::r_too_small, "need R >= 2K so the walk cannot hit the cap");
  BirthDeathChain chain = free_group_radial_chain(rank, R);
  RadialOracle o;
  o.rank = rank;
  o.chain_length = R;
  o.p2k = chain_return_series(chain, K);
  o.eigen_bound = chain_top_eigenvalue(chain);
  return o;
}

}  // namespace cospect
