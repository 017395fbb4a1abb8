#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cospect/errors.hpp"
#include "cospect/series.hpp"

namespace cospect {

enum class FitModel { loglinear, loglinear_polycorrected, ratio };

inline const char* fit_model_name(FitModel m) {
  switch (m) {
    case FitModel::loglinear: return "loglinear";
    case FitModel::loglinear_polycorrected: return "loglinear-polycorrected";
    case FitModel::ratio: return "ratio";
  }
  return "?";
}

inline FitModel fit_model_from_name(const std::string& s) {
  if (s == "loglinear") return FitModel::loglinear;
  if (s == "loglinear-polycorrected") return FitModel::loglinear_polycorrected;
  if (s == "ratio") return FitModel::ratio;
  raise(errc::config_error, "unknown fit model '" + s + "'");
}

struct RadiusEstimate {
  double value = 0;
  double stderr_value = 0;
  FitModel method = FitModel::loglinear;
  int k_lo = 0, k_hi = 0;   // window actually used
  bool truncated = false;   // window shortened to the positive prefix
  bool clamped = false;     // raw estimate exceeded 1
  double residual_rms = 0;
  int points = 0;
};

// Fit exp(2k log rho) decay against the even-time series p_{2k}, k = 1-based.
// polycorrected adds the k^{-3/2} local-limit factor as a fixed regressor;
// ratio takes the geometric mean of consecutive even-step ratios.
inline RadiusEstimate fit_radius(const std::vector<double>& p2k, int k_lo, int k_hi,
                                 FitModel model) {
  int K = static_cast<int>(p2k.size());
  require(k_lo >= 1 && k_hi <= K && k_lo <= k_hi, errc::invalid_argument,
          "fit window outside series grid");

  // degenerate tail: keep the strictly positive prefix, visibly flagged
  int hi = k_lo - 1;
  for (int k = k_lo; k <= k_hi; ++k) {
    if (!(p2k[static_cast<size_t>(k - 1)] > 0)) break;
    hi = k;
  }
  bool truncated = hi < k_hi;
  if (hi - k_lo + 1 < 3) {
    if (truncated)
      raise(errc::zero_probability_in_window,
            "fewer than 3 positive points in window; enlarge N or shrink the window");
    raise(errc::window_too_short, "fit window must contain at least 3 points");
  }

  RadiusEstimate est;
  est.method = model;
  est.k_lo = k_lo;
  est.k_hi = hi;
  est.truncated = truncated;
  est.points = hi - k_lo + 1;

  if (model == FitModel::ratio) {
    double acc = 0;
    for (int k = k_lo; k < hi; ++k)
      acc += std::log(p2k[static_cast<size_t>(k)] / p2k[static_cast<size_t>(k - 1)]);
    double mean_log_ratio = acc / static_cast<double>(hi - k_lo);
    double raw = std::exp(mean_log_ratio / 2.0);
    est.clamped = raw > 1.0;
    est.value = std::min(1.0, std::max(0.0, raw));
    double var = 0;
    for (int k = k_lo; k < hi; ++k) {
      double r = std::log(p2k[static_cast<size_t>(k)] / p2k[static_cast<size_t>(k - 1)]) -
                 mean_log_ratio;
      var += r * r;
    }
    int m = hi - k_lo;
    if (m > 1) {
      double se_mean = std::sqrt(var / (m - 1) / m);
      est.stderr_value = est.value * se_mean / 2.0;
      est.residual_rms = std::sqrt(var / m);
    }
    return est;
  }

  // least squares of y against x = 2k
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = est.points;
  for (int k = k_lo; k <= hi; ++k) {
    double x = 2.0 * k;
    double y = std::log(p2k[static_cast<size_t>(k - 1)]);
    if (model == FitModel::loglinear_polycorrected) y += 1.5 * std::log(static_cast<double>(k));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = m * sxx - sx * sx;
  double slope = (m * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / m;

  double ss_res = 0;
  for (int k = k_lo; k <= hi; ++k) {
    double x = 2.0 * k;
    double y = std::log(p2k[static_cast<size_t>(k - 1)]);
    if (model == FitModel::loglinear_polycorrected) y += 1.5 * std::log(static_cast<double>(k));
    double r = y - (slope * x + intercept);
    ss_res += r * r;
  }
  double raw = std::exp(slope);
  est.clamped = raw > 1.0;
  est.value = std::min(1.0, std::max(0.0, raw));
  est.residual_rms = std::sqrt(ss_res / m);
  if (m > 2) {
    double s2 = ss_res / (m - 2);
    double se_slope = std::sqrt(s2 * m / denom);
    est.stderr_value = est.value * se_slope;
  }
  return est;
}

inline RadiusEstimate fit_radius(const ReturnSeries& series, int k_lo, int k_hi, FitModel model,
                                 bool upper = false) {
  return fit_radius(upper ? series.p_hat_upper_all() : series.p_hat_all(), k_lo, k_hi, model);
}

// Default window [K/2, K]: early terms carry transient bias, late terms noise.
inline std::pair<int, int> default_window(int K) { return {std::max(1, K / 2), K}; }

// The lazy walk theta = nu/2 + delta_e/2 has norm (1 + s)/2 with s the top of
// spec lambda(nu); invert that affine map when reporting for the original nu.
inline double delazify(double lazy_value) {
  return std::min(1.0, std::max(0.0, 2.0 * lazy_value - 1.0));
}

}  // namespace cospect
