#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>
#include <tuple>
#include <vector>

#include "cospect/ball.hpp"
#include "cospect/errors.hpp"
#include "cospect/stepdist.hpp"

namespace cospect {

// CSR matrix with an explicit symmetry flag. Walk operators built here are
// substochastic: Dirichlet truncation drops boundary mass, so row sums may
// fall below one but never exceed it.
class SparseOperator {
public:
  using Triplet = std::tuple<int64_t, int64_t, double>;

  SparseOperator() = default;

  static SparseOperator from_triplets(int64_t dim, std::vector<Triplet> entries, bool symmetric) {
    SparseOperator op;
    op.dim_ = dim;
    op.symmetric_ = symmetric;
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
      return std::get<1>(a) < std::get<1>(b);
    });
    std::vector<int64_t> rows;
    for (const auto& [r, c, w] : entries) {
      require(r >= 0 && r < dim && c >= 0 && c < dim, errc::index_out_of_range, "triplet index");
      if (!rows.empty() && rows.back() == r && op.col_.back() == c) {
        op.val_.back() += w;  // merge duplicates
      } else {
        rows.push_back(r);
        op.col_.push_back(c);
        op.val_.push_back(w);
      }
    }
    op.row_ptr_.assign(static_cast<size_t>(dim) + 1, 0);
    for (int64_t r : rows) ++op.row_ptr_[static_cast<size_t>(r) + 1];
    for (size_t i = 1; i < op.row_ptr_.size(); ++i) op.row_ptr_[i] += op.row_ptr_[i - 1];
    return op;
  }

  int64_t dim() const { return dim_; }
  int64_t nnz() const { return static_cast<int64_t>(val_.size()); }
  bool symmetric() const { return symmetric_; }

  void apply(const std::vector<double>& x, std::vector<double>& y, int workers = 1) const {
    y.assign(static_cast<size_t>(dim_), 0.0);
    auto rows = [&](int64_t r0, int64_t r1) {
      for (int64_t r = r0; r < r1; ++r) {
        double acc = 0;
        for (int64_t e = row_ptr_[static_cast<size_t>(r)]; e < row_ptr_[static_cast<size_t>(r) + 1];
             ++e)
          acc += val_[static_cast<size_t>(e)] * x[static_cast<size_t>(col_[static_cast<size_t>(e)])];
        y[static_cast<size_t>(r)] = acc;
      }
    };
    if (workers <= 1 || dim_ < 4096) {
      rows(0, dim_);
      return;
    }
    // rows are independent and each row accumulates in a fixed order, so the
    // result is identical for any worker count
    std::vector<std::thread> pool;
    int64_t chunk = (dim_ + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      int64_t r0 = w * chunk, r1 = std::min<int64_t>(dim_, r0 + chunk);
      if (r0 >= r1) break;
      pool.emplace_back(rows, r0, r1);
    }
    for (auto& t : pool) t.join();
  }

  double min_diagonal() const {
    double m = dim_ > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    for (int64_t r = 0; r < dim_; ++r) {
      double d = 0;
      for (int64_t e = row_ptr_[static_cast<size_t>(r)]; e < row_ptr_[static_cast<size_t>(r) + 1];
           ++e)
        if (col_[static_cast<size_t>(e)] == r) d += val_[static_cast<size_t>(e)];
      m = std::min(m, d);
    }
    return m;
  }

  double max_row_sum() const {
    double m = 0;
    for (int64_t r = 0; r < dim_; ++r) {
      double s = 0;
      for (int64_t e = row_ptr_[static_cast<size_t>(r)]; e < row_ptr_[static_cast<size_t>(r) + 1];
           ++e)
        s += val_[static_cast<size_t>(e)];
      m = std::max(m, s);
    }
    return m;
  }

  double symmetry_defect() const {
    // max |A - A^T| entry; quadratic probe is fine at test sizes
    double defect = 0;
    for (int64_t r = 0; r < dim_; ++r)
      for (int64_t e = row_ptr_[static_cast<size_t>(r)]; e < row_ptr_[static_cast<size_t>(r) + 1];
           ++e)
        defect = std::max(defect,
                          std::fabs(val_[static_cast<size_t>(e)] -
                                    entry(col_[static_cast<size_t>(e)], r)));
    return defect;
  }

  double entry(int64_t r, int64_t c) const {
    for (int64_t e = row_ptr_[static_cast<size_t>(r)]; e < row_ptr_[static_cast<size_t>(r) + 1];
         ++e)
      if (col_[static_cast<size_t>(e)] == c) return val_[static_cast<size_t>(e)];
    return 0.0;
  }

  template <typename F>
  void for_each_entry(F&& f) const {
    for (int64_t r = 0; r < dim_; ++r)
      for (int64_t e = row_ptr_[static_cast<size_t>(r)]; e < row_ptr_[static_cast<size_t>(r) + 1];
           ++e)
        f(r, col_[static_cast<size_t>(e)], val_[static_cast<size_t>(e)]);
  }

private:
  int64_t dim_ = 0;
  std::vector<int64_t> row_ptr_;
  std::vector<int64_t> col_;
  std::vector<double> val_;
  bool symmetric_ = false;
};

// Truncated Markov operator lambda(nu) on a coset ball; boundary mass is
// dropped, which keeps the operator symmetric substochastic and makes its
// norm a certified lower bound for the untruncated one.
inline SparseOperator build_markov(const CosetBall& ball, const StepDistribution& nu) {
  std::vector<SparseOperator::Triplet> entries;
  const MarkedGroup& g = nu.group();
  for (const auto& atom : nu.atoms()) {
    if (atom.element.empty()) {
      for (int64_t s = 0; s < ball.states(); ++s) entries.emplace_back(s, s, atom.prob);
      continue;
    }
    // locate the matching adjacency column
    std::string want = g.key_bytes(atom.element);
    size_t col = ball.atoms.size();
    for (size_t ai = 0; ai < ball.atoms.size(); ++ai)
      if (g.key_bytes(ball.atoms[ai]) == want) {
        col = ai;
        break;
      }
    require(col < ball.atoms.size(), errc::support_mismatch,
            "ball was not explored with this step support");
    for (int64_t s = 0; s < ball.states(); ++s) {
      int64_t t = ball.adjacency[static_cast<size_t>(s)][col];
      if (t != CosetBall::boundary) entries.emplace_back(s, t, atom.prob);
    }
  }
  SparseOperator op = SparseOperator::from_triplets(ball.states(), std::move(entries), true);
  require(op.max_row_sum() <= 1.0 + 1e-12, errc::invalid_argument,
          "markov rows must be substochastic");
  return op;
}

struct NormEstimate {
  double value = 0;
  int iterations = 0;
  double residual = 0;
  bool converged = false;
};

namespace detail {

// power iteration on A^2 given y = A x as a callback
inline NormEstimate power_norm(const std::function<void(const std::vector<double>&,
                                                        std::vector<double>&)>& apply,
                               int64_t dim, double tol, int max_iter) {
  NormEstimate est;
  if (dim == 0) {
    est.converged = true;
    return est;
  }
  std::vector<double> v(static_cast<size_t>(dim), 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> av, a2v;
  double prev_rq = -1;
  for (int it = 1; it <= max_iter; ++it) {
    apply(v, av);
    apply(av, a2v);
    double rq = 0;
    for (size_t i = 0; i < v.size(); ++i) rq += v[i] * a2v[i];  // <A^2 v, v> = |Av|^2 >= 0
    est.iterations = it;
    est.value = std::sqrt(std::max(0.0, rq));
    double n2 = 0;
    for (double x : a2v) n2 += x * x;
    double norm_a2v = std::sqrt(n2);
    // eigen-residual of A^2 at the current iterate
    double res2 = 0;
    for (size_t i = 0; i < v.size(); ++i) {
      double r = a2v[i] - rq * v[i];
      res2 += r * r;
    }
    est.residual = std::sqrt(res2);
    if (prev_rq >= 0 && std::fabs(rq - prev_rq) < tol) {
      est.converged = true;
      return est;
    }
    prev_rq = rq;
    if (norm_a2v == 0) {  // all mass exited: zero operator on this vector
      est.value = 0;
      est.residual = 0;
      est.converged = true;
      return est;
    }
    for (size_t i = 0; i < v.size(); ++i) v[i] = a2v[i] / norm_a2v;
  }
  est.converged = false;
  return est;
}

}  // namespace detail

// Largest singular value of a symmetric operator by power iteration on op^2
// (deterministic all-ones start; squaring removes the sign of the extreme
// eigenvalue). The value is a lower bound within the reported residual.
inline NormEstimate operator_norm(const SparseOperator& op, double tol = 1e-12,
                                  int max_iter = 10000, int workers = 1) {
  require(op.symmetric(), errc::not_symmetric, "operator_norm needs a symmetric operator");
  return detail::power_norm(
      [&op, workers](const std::vector<double>& x, std::vector<double>& y) {
        op.apply(x, y, workers);
      },
      op.dim(), tol, max_iter);
}

}  // namespace cospect
