#pragma once

#include <complex>
#include <vector>

#include "cospect/errors.hpp"
#include "cospect/word.hpp"

namespace cospect {

using cscalar = std::complex<double>;
using cvector = std::vector<cscalar>;
using cmatrix = std::vector<cvector>;  // row-major, square

inline cvector mat_vec(const cmatrix& m, const cvector& v) {
  size_t n = m.size();
  cvector out(n, cscalar(0, 0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) out[i] += m[i][j] * v[j];
  return out;
}

inline cmatrix adjoint(const cmatrix& m) {
  size_t n = m.size();
  cmatrix out(n, cvector(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) out[i][j] = std::conj(m[j][i]);
  return out;
}

inline double unitarity_defect(const cmatrix& m) {
  size_t n = m.size();
  double defect = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) {
      cscalar acc(0, 0);
      for (size_t k = 0; k < n; ++k) acc += std::conj(m[k][i]) * m[k][j];
      if (i == j) acc -= 1.0;
      defect = std::max(defect, std::abs(acc));
    }
  return defect;
}

inline double vec_norm(const cvector& v) {
  double n2 = 0;
  for (const auto& x : v) n2 += std::norm(x);
  return std::sqrt(n2);
}

struct MeanErgodicReport {
  std::vector<cvector> averages;      // one per Folner set
  cvector fixed_projection;           // P_Fix(xi)
  std::vector<double> deviations;     // |avg_n - P xi|
};

namespace detail {

// orthonormal basis of the joint kernel of (U_g - 1), via Gram-Schmidt on the
// null space of the stacked matrix
inline std::vector<cvector> joint_fixed_space(const std::vector<cmatrix>& gens, size_t dim) {
  // stack rows of (U - I) for all generators, then row-reduce
  std::vector<cvector> rows;
  for (const auto& u : gens)
    for (size_t i = 0; i < dim; ++i) {
      cvector r = u[i];
      r[i] -= 1.0;
      rows.push_back(std::move(r));
    }
  // Gaussian elimination with partial pivoting
  size_t rank = 0;
  std::vector<size_t> pivot_cols;
  for (size_t col = 0; col < dim && rank < rows.size(); ++col) {
    size_t best = rank;
    for (size_t r = rank; r < rows.size(); ++r)
      if (std::abs(rows[r][col]) > std::abs(rows[best][col])) best = r;
    if (std::abs(rows[best][col]) < 1e-9) continue;
    std::swap(rows[rank], rows[best]);
    cscalar inv = 1.0 / rows[rank][col];
    for (size_t j = 0; j < dim; ++j) rows[rank][j] *= inv;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (r == rank) continue;
      cscalar f = rows[r][col];
      if (std::abs(f) == 0) continue;
      for (size_t j = 0; j < dim; ++j) rows[r][j] -= f * rows[rank][j];
    }
    pivot_cols.push_back(col);
    ++rank;
  }
  // free columns parameterize the kernel
  std::vector<cvector> basis;
  std::vector<char> is_pivot(dim, 0);
  for (size_t c : pivot_cols) is_pivot[c] = 1;
  for (size_t c = 0; c < dim; ++c) {
    if (is_pivot[c]) continue;
    cvector v(dim, cscalar(0, 0));
    v[c] = 1.0;
    for (size_t r = 0; r < rank; ++r) v[pivot_cols[r]] = -rows[r][c];
    basis.push_back(std::move(v));
  }
  // Gram-Schmidt
  std::vector<cvector> ortho;
  for (auto& v : basis) {
    for (const auto& b : ortho) {
      cscalar ip(0, 0);
      for (size_t i = 0; i < dim; ++i) ip += std::conj(b[i]) * v[i];
      for (size_t i = 0; i < dim; ++i) v[i] -= ip * b[i];
    }
    double n = vec_norm(v);
    if (n > 1e-10) {
      for (auto& x : v) x /= n;
      ortho.push_back(v);
    }
  }
  return ortho;
}

}  // namespace detail

// Finite-dimensional mean ergodic averages over Folner sets of cosets:
// avg_n = (1/|F_n|) sum_{g in F_n} pi(g) xi, compared against the projection
// onto the joint fixed space of the generator unitaries. One representative
// word per coset; xi must be fixed by the subgroup for that to be coherent.
inline MeanErgodicReport mean_ergodic_average(const MarkedGroup& group,
                                              const std::vector<cmatrix>& generator_images,
                                              const cvector& xi,
                                              const std::vector<std::vector<Word>>& folner_sets,
                                              const std::vector<Word>* lambda_generators = nullptr) {
  size_t dim = xi.size();
  require(static_cast<int>(generator_images.size()) == group.generator_count(),
          errc::invalid_argument, "one unitary per generator");
  for (const auto& u : generator_images) {
    require(u.size() == dim, errc::invalid_argument, "matrix dimension mismatch");
    for (const auto& row : u)
      require(row.size() == dim, errc::invalid_argument, "matrix must be square");
    require(unitarity_defect(u) <= 1e-10, errc::not_unitary, "generator image is not unitary");
  }

  std::vector<cmatrix> inverses;
  for (const auto& u : generator_images) inverses.push_back(adjoint(u));

  auto apply_word = [&](const Word& w, const cvector& v) {
    cvector out = v;
    for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
      int32_t l = *it;
      out = mat_vec(l > 0 ? generator_images[static_cast<size_t>(l - 1)]
                          : inverses[static_cast<size_t>(-l - 1)],
                    out);
    }
    return out;
  };

  if (lambda_generators) {
    for (const auto& w : *lambda_generators) {
      cvector moved = apply_word(w, xi);
      double dev = 0;
      for (size_t i = 0; i < dim; ++i) dev += std::norm(moved[i] - xi[i]);
      require(std::sqrt(dev) <= 1e-10, errc::not_lambda_fixed,
              "xi is not fixed by the declared subgroup generators");
    }
  }

  MeanErgodicReport rep;
  auto fixed_basis = detail::joint_fixed_space(generator_images, dim);
  rep.fixed_projection.assign(dim, cscalar(0, 0));
  for (const auto& b : fixed_basis) {
    cscalar ip(0, 0);
    for (size_t i = 0; i < dim; ++i) ip += std::conj(b[i]) * xi[i];
    for (size_t i = 0; i < dim; ++i) rep.fixed_projection[i] += ip * b[i];
  }

  for (const auto& fset : folner_sets) {
    require(!fset.empty(), errc::empty_set, "Folner set must be nonempty");
    cvector acc(dim, cscalar(0, 0));
    for (const auto& w : fset) {
      cvector moved = apply_word(w, xi);
      for (size_t i = 0; i < dim; ++i) acc[i] += moved[i];
    }
    for (auto& x : acc) x /= static_cast<double>(fset.size());
    double dev = 0;
    for (size_t i = 0; i < dim; ++i) dev += std::norm(acc[i] - rep.fixed_projection[i]);
    rep.deviations.push_back(std::sqrt(dev));
    rep.averages.push_back(std::move(acc));
  }
  return rep;
}

}  // namespace cospect
