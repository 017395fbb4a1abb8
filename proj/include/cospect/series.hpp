#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cospect/errors.hpp"

namespace cospect {

struct WilsonInterval {
  double lo;
  double hi;
};

// Wilson score interval; behaves at small hit counts where Wald does not.
inline WilsonInterval wilson_interval(int64_t hits, int64_t n, double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  double p = static_cast<double>(hits) / static_cast<double>(n);
  double z2 = z * z;
  double denom = 1.0 + z2 / static_cast<double>(n);
  double center = p + z2 / (2.0 * static_cast<double>(n));
  double rad = z * std::sqrt(p * (1.0 - p) / static_cast<double>(n) +
                             z2 / (4.0 * static_cast<double>(n) * static_cast<double>(n)));
  return {(center - rad) / denom, (center + rad) / denom};
}

// Even-time return counts p_hat_{2k} = hits[k-1]/samples for k = 1..K.
// When a target can answer "undecided", hits_upper counts hit-or-undecided
// and [hits, hits_upper] brackets the truth; otherwise the two are equal.
struct ReturnSeries {
  int K = 0;
  int64_t samples = 0;
  std::vector<int64_t> hits;
  std::vector<int64_t> hits_upper;
  bool bracketed = false;

  void init(int K_, int64_t samples_) {
    K = K_;
    samples = samples_;
    hits.assign(static_cast<size_t>(K), 0);
    hits_upper.assign(static_cast<size_t>(K), 0);
  }

  double p_hat(int k) const {
    require(k >= 1 && k <= K, errc::index_out_of_range, "series index");
    if (samples == 0) return 0.0;
    return static_cast<double>(hits[static_cast<size_t>(k - 1)]) / static_cast<double>(samples);
  }

  double p_hat_upper(int k) const {
    require(k >= 1 && k <= K, errc::index_out_of_range, "series index");
    if (samples == 0) return 0.0;
    return static_cast<double>(hits_upper[static_cast<size_t>(k - 1)]) /
           static_cast<double>(samples);
  }

  WilsonInterval ci(int k, double z = 1.959963984540054) const {
    return wilson_interval(hits[static_cast<size_t>(k - 1)], samples, z);
  }

  std::vector<double> p_hat_all() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(K));
    for (int k = 1; k <= K; ++k) out.push_back(p_hat(k));
    return out;
  }

  std::vector<double> p_hat_upper_all() const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(K));
    for (int k = 1; k <= K; ++k) out.push_back(p_hat_upper(k));
    return out;
  }

  void merge_counts(const ReturnSeries& other) {
    samples += other.samples;
    for (size_t i = 0; i < hits.size(); ++i) {
      hits[i] += other.hits[i];
      hits_upper[i] += other.hits_upper[i];
    }
    bracketed = bracketed || other.bracketed;
  }
};

}  // namespace cospect
