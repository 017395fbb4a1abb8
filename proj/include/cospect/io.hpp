#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cospect/env_walks.hpp"
#include "cospect/fit.hpp"
#include "cospect/series.hpp"

namespace cospect {

using json = nlohmann::json;

inline constexpr const char* kBuildId = "cospect 0.1.0";
inline constexpr int kSchemaVersion = 1;

inline json series_to_json(const ReturnSeries& s) {
  json j;
  j["K"] = s.K;
  j["samples"] = s.samples;
  j["hits"] = s.hits;
  if (s.bracketed) j["hits_upper"] = s.hits_upper;
  json p = json::array(), lo = json::array(), hi = json::array();
  for (int k = 1; k <= s.K; ++k) {
    p.push_back(s.p_hat(k));
    auto ci = s.ci(k);
    lo.push_back(ci.lo);
    hi.push_back(ci.hi);
  }
  j["p_hat"] = p;
  j["ci_lo"] = lo;
  j["ci_hi"] = hi;
  return j;
}

inline json estimate_to_json(const RadiusEstimate& e, uint64_t seed) {
  json j;
  j["value"] = e.value;
  j["stderr"] = e.stderr_value;
  j["method"] = fit_model_name(e.method);
  j["window"] = {e.k_lo, e.k_hi};
  j["truncated"] = e.truncated;
  j["clamped"] = e.clamped;
  j["points"] = e.points;
  j["residual_rms"] = e.residual_rms;
  j["seed"] = seed;
  return j;
}

// columns: k, hits, samples, p_hat, ci_lo, ci_hi
inline std::string series_to_csv(const ReturnSeries& s) {
  std::ostringstream out;
  out.precision(17);
  out << "k,hits,samples,p_hat,ci_lo,ci_hi\n";
  for (int k = 1; k <= s.K; ++k) {
    auto ci = s.ci(k);
    out << k << ',' << s.hits[static_cast<size_t>(k - 1)] << ',' << s.samples << ','
        << s.p_hat(k) << ',' << ci.lo << ',' << ci.hi << '\n';
  }
  return out.str();
}

// columns: p, k, hits_lower, hits_upper, samples, uinf_proxy_rate
inline std::string percolation_to_csv(const PercolationSweep& sweep, size_t window_index) {
  std::ostringstream out;
  out.precision(17);
  out << "p,k,hits_lower,hits_upper,samples,uinf_proxy_rate\n";
  for (size_t pi = 0; pi < sweep.p_levels.size(); ++pi) {
    const auto& rs = sweep.series[pi][window_index];
    double rate = sweep.samples > 0 && sweep.uinf_window > 0
                      ? static_cast<double>(sweep.uinf_hits[pi]) / static_cast<double>(sweep.samples)
                      : 0.0;
    for (int k = 1; k <= rs.K; ++k)
      out << sweep.p_levels[pi] << ',' << k << ',' << rs.hits[static_cast<size_t>(k - 1)] << ','
          << rs.hits_upper[static_cast<size_t>(k - 1)] << ',' << rs.samples << ',' << rate << '\n';
  }
  return out.str();
}

// columns: src, dst, weight (ball edge list for external inspection)
inline std::string ball_edges_to_csv(const CosetBall& ball, const StepDistribution& nu) {
  std::ostringstream out;
  out.precision(17);
  out << "src,dst,weight\n";
  for (int64_t s = 0; s < ball.states(); ++s)
    for (size_t ai = 0; ai < ball.atoms.size(); ++ai) {
      int64_t t = ball.adjacency[static_cast<size_t>(s)][ai];
      if (t == CosetBall::boundary) continue;
      double w = 0;
      for (const auto& atom : nu.atoms())
        if (atom.element == ball.atoms[ai]) w = atom.prob;
      out << s << ',' << t << ',' << w << '\n';
    }
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), errc::invalid_argument, "cannot open output file " + path);
  f << content;
}

}  // namespace cospect
