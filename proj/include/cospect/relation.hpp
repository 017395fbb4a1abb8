#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "cospect/errors.hpp"

namespace cospect {

// Finite pmp relation on {0..n-1} with the uniform measure: a partition into
// equivalence classes, reflexive/symmetric/transitive by construction.
struct FiniteRelation {
  int n = 0;
  std::vector<int> class_id;  // normalized: ids appear in order of least member

  int classes_count() const {
    int m = 0;
    for (int c : class_id) m = std::max(m, c + 1);
    return m;
  }

  std::vector<std::vector<int>> classes() const {
    std::vector<std::vector<int>> out(static_cast<size_t>(classes_count()));
    for (int x = 0; x < n; ++x) out[static_cast<size_t>(class_id[static_cast<size_t>(x)])].push_back(x);
    return out;
  }

  bool related(int x, int y) const {
    return class_id[static_cast<size_t>(x)] == class_id[static_cast<size_t>(y)];
  }

  // every class of this relation sits inside one class of `coarser`
  bool refines(const FiniteRelation& coarser) const {
    if (coarser.n != n) return false;
    std::vector<int> rep(static_cast<size_t>(classes_count()), -1);
    for (int x = 0; x < n; ++x) {
      int c = class_id[static_cast<size_t>(x)];
      if (rep[static_cast<size_t>(c)] < 0)
        rep[static_cast<size_t>(c)] = coarser.class_id[static_cast<size_t>(x)];
      else if (rep[static_cast<size_t>(c)] != coarser.class_id[static_cast<size_t>(x)])
        return false;
    }
    return true;
  }

  void normalize() {
    std::vector<int> remap(class_id.size(), -1);
    int next = 0;
    for (int x = 0; x < n; ++x) {
      int c = class_id[static_cast<size_t>(x)];
      if (remap[static_cast<size_t>(c)] < 0) remap[static_cast<size_t>(c)] = next++;
    }
    for (auto& c : class_id) c = remap[static_cast<size_t>(c)];
  }
};

inline void validate_permutation(int n, const std::vector<int>& perm) {
  require(static_cast<int>(perm.size()) == n, errc::not_a_permutation, "permutation length");
  std::vector<char> seen(static_cast<size_t>(n), 0);
  for (int v : perm) {
    require(v >= 0 && v < n && !seen[static_cast<size_t>(v)], errc::not_a_permutation,
            "not a bijection of {0..n-1}");
    seen[static_cast<size_t>(v)] = 1;
  }
}

// Orbit relation of a permutation group action, via union-find closure.
inline FiniteRelation build_relation_from_permutations(int n,
                                                       const std::vector<std::vector<int>>& perms) {
  require(n >= 1, errc::invalid_argument, "need n >= 1 points");
  for (const auto& p : perms) validate_permutation(n, p);

  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  };
  for (const auto& p : perms)
    for (int x = 0; x < n; ++x) {
      int a = find(x), b = find(p[static_cast<size_t>(x)]);
      if (a != b) parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
    }

  FiniteRelation r;
  r.n = n;
  r.class_id.resize(static_cast<size_t>(n));
  for (int x = 0; x < n; ++x) r.class_id[static_cast<size_t>(x)] = find(x);
  r.normalize();
  return r;
}

// An element of the full group [R]: a permutation moving points within their
// R-classes.
struct FullGroupElement {
  std::vector<int> perm;

  static FullGroupElement checked(const FiniteRelation& r, std::vector<int> p) {
    validate_permutation(r.n, p);
    for (int x = 0; x < r.n; ++x)
      require(r.related(x, p[static_cast<size_t>(x)]), errc::not_in_full_group,
              "permutation leaves an R-class");
    return FullGroupElement{std::move(p)};
  }

  std::vector<int> inverse() const {
    std::vector<int> inv(perm.size());
    for (size_t x = 0; x < perm.size(); ++x) inv[static_cast<size_t>(perm[x])] = static_cast<int>(x);
    return inv;
  }
};

// Both sides of the mass-transport identity
//   (1/n) sum_x sum_{y in [x]} f(x,y)  =  (1/n) sum_x sum_{y in [x]} f(y,x),
// accumulated with long-double Kahan compensation.
inline std::pair<double, double> mass_transport_check(
    const FiniteRelation& r, const std::function<double(int, int)>& f) {
  long double lhs = 0, lc = 0, rhs = 0, rc = 0;
  auto add = [](long double& acc, long double& comp, long double term) {
    long double y = term - comp;
    long double t = acc + y;
    comp = (t - acc) - y;
    acc = t;
  };
  auto classes = r.classes();
  for (const auto& cls : classes)
    for (int x : cls)
      for (int y : cls) {
        add(lhs, lc, static_cast<long double>(f(x, y)));
        add(rhs, rc, static_cast<long double>(f(y, x)));
      }
  double scale = 1.0 / static_cast<double>(r.n);
  return {static_cast<double>(lhs) * scale, static_cast<double>(rhs) * scale};
}

// Finite shadow of the ergodic decomposition: invariant components are
// exactly the classes' saturations, i.e. the classes themselves.
inline std::vector<std::vector<int>> ergodic_components(const FiniteRelation& r) {
  return r.classes();
}

}  // namespace cospect
