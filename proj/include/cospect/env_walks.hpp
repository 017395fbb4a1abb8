#pragma once

#include <thread>
#include <vector>

#include "cospect/environment.hpp"
#include "cospect/walks.hpp"

namespace cospect {

namespace detail {

template <typename Fn>
inline void parallel_chunks(int64_t N, int workers, Fn&& fn) {
  if (workers < 1) workers = 1;
  if (static_cast<int64_t>(workers) > N) workers = static_cast<int>(N);
  if (workers == 1) {
    fn(0, 0, N);
    return;
  }
  std::vector<std::thread> pool;
  int64_t chunk = (N + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int64_t begin = static_cast<int64_t>(w) * chunk;
    int64_t end = std::min<int64_t>(N, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

struct SmallPiecesResult {
  ReturnSeries on_E;   // samples whose environment has x(e) = 1
  ReturnSeries off_E;  // the complement: hits only at exact returns
};

// Example-4.1 dichotomy runner: one Bernoulli-shift environment per sample,
// samples split by the identity coordinate.
inline SmallPiecesResult smallpieces_series(const MarkedGroup& group, double p_bias,
                                            const StepDistribution& nu, int K, int64_t N,
                                            uint64_t seed, int workers = 1) {
  require(K >= 1 && N >= 1, errc::invalid_argument, "K and N must be >= 1");
  int lanes = workers < 1 ? 1 : workers;
  std::vector<SmallPiecesResult> partial(static_cast<size_t>(lanes));
  for (auto& pr : partial) {
    pr.on_E.init(K, 0);
    pr.off_E.init(K, 0);
  }

  detail::parallel_chunks(N, lanes, [&](int w, int64_t begin, int64_t end) {
    auto& out = partial[static_cast<size_t>(w)];
    WalkState position(group);
    const auto& atoms = nu.atoms();
    for (int64_t i = begin; i < end; ++i) {
      rng_stream rng(seed, static_cast<uint64_t>(i));
      BernoulliShiftEnv env(group, p_bias, detail::env_seed_for(seed, i));
      bool in_E = env.base_in_E();
      ReturnSeries& series = in_E ? out.on_E : out.off_E;
      ++series.samples;
      position.reset();
      for (int t = 1; t <= 2 * K; ++t) {
        position.push_word(atoms[nu.sample_index(rng.uniform01())].element);
        if ((t & 1) == 0) {
          bool hit = in_E ? env.coordinate(position.inverse_word()) : position.at_identity();
          if (hit) {
            ++series.hits[static_cast<size_t>(t / 2 - 1)];
            ++series.hits_upper[static_cast<size_t>(t / 2 - 1)];
          }
        }
      }
    }
  });

  SmallPiecesResult total;
  total.on_E.init(K, 0);
  total.off_E.init(K, 0);
  for (const auto& pr : partial) {
    total.on_E.merge_counts(pr.on_E);
    total.off_E.merge_counts(pr.off_E);
  }
  return total;
}

struct PercolationSweep {
  std::vector<double> p_levels;
  std::vector<int64_t> windows;
  std::vector<std::vector<ReturnSeries>> series;  // [p][window]
  std::vector<int64_t> uinf_hits;                 // per p, at uinf_window
  int64_t uinf_window = 0;
  int64_t samples = 0;
};

// Walk against the cluster relation at several (p, window) levels over the
// same sampled paths and the same edge uniforms: hit counts are monotone in
// p exactly, and brackets nest as the window grows.
inline PercolationSweep percolation_sweep(const MarkedGroup& group, const std::vector<Word>& gens,
                                          const std::vector<double>& p_levels,
                                          const std::vector<int64_t>& windows,
                                          const StepDistribution& nu, int K, int64_t N,
                                          uint64_t seed, int64_t uinf_window = 0,
                                          int workers = 1) {
  require(K >= 1 && N >= 1, errc::invalid_argument, "K and N must be >= 1");
  require(!p_levels.empty() && !windows.empty(), errc::invalid_argument,
          "need p levels and windows");
  for (size_t i = 1; i < p_levels.size(); ++i)
    require(p_levels[i - 1] <= p_levels[i], errc::unsorted_levels, "p levels must ascend");

  int lanes = workers < 1 ? 1 : workers;
  size_t np = p_levels.size(), nw = windows.size();
  auto blank = [&] {
    PercolationSweep s;
    s.p_levels = p_levels;
    s.windows = windows;
    s.uinf_window = uinf_window;
    s.series.assign(np, std::vector<ReturnSeries>(nw));
    for (auto& row : s.series)
      for (auto& rs : row) rs.init(K, 0);
    s.uinf_hits.assign(np, 0);
    return s;
  };
  std::vector<PercolationSweep> partial(static_cast<size_t>(lanes), blank());

  detail::parallel_chunks(N, lanes, [&](int w, int64_t begin, int64_t end) {
    auto& out = partial[static_cast<size_t>(w)];
    WalkState position(group);
    const auto& atoms = nu.atoms();
    for (int64_t i = begin; i < end; ++i) {
      rng_stream rng(seed, static_cast<uint64_t>(i));
      auto envs = monotone_coupled_envs(group, gens, p_levels, detail::env_seed_for(seed, i));
      out.samples += 1;
      if (uinf_window > 0)
        for (size_t pi = 0; pi < np; ++pi)
          if (u_infinity_proxy(envs[pi], uinf_window)) ++out.uinf_hits[pi];
      position.reset();
      for (int t = 1; t <= 2 * K; ++t) {
        position.push_word(atoms[nu.sample_index(rng.uniform01())].element);
        if ((t & 1) == 0) {
          Word pos_word = position.word();
          size_t kk = static_cast<size_t>(t / 2 - 1);
          for (size_t pi = 0; pi < np; ++pi)
            for (size_t wi = 0; wi < nw; ++wi) {
              Connectivity c = percolation_membership(envs[pi], pos_word, windows[wi]);
              auto& rs = out.series[pi][wi];
              if (c == Connectivity::connected) {
                ++rs.hits[kk];
                ++rs.hits_upper[kk];
              } else if (c == Connectivity::undecided) {
                ++rs.hits_upper[kk];
                rs.bracketed = true;
              }
            }
        }
      }
    }
  });

  PercolationSweep total = blank();
  for (const auto& pr : partial) {
    total.samples += pr.samples;
    for (size_t pi = 0; pi < np; ++pi) {
      total.uinf_hits[pi] += pr.uinf_hits[pi];
      for (size_t wi = 0; wi < nw; ++wi) total.series[pi][wi].merge_counts(pr.series[pi][wi]);
    }
  }
  for (auto& row : total.series)
    for (auto& rs : row) rs.samples = total.samples;
  return total;
}

}  // namespace cospect
