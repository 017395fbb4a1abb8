#pragma once

#include <functional>
#include <memory>
#include <thread>
#include <vector>

#include "cospect/rng.hpp"
#include "cospect/series.hpp"
#include "cospect/stepdist.hpp"
#include "cospect/subgroup.hpp"
#include "cospect/word.hpp"

namespace cospect {

struct TargetVerdict {
  bool hit = false;
  bool undecided = false;
};

// A family of membership targets evaluated along one sampled walk. All
// targets see the same path, which is what makes coupled monotonicity
// statements exact rather than statistical.
class TargetSet {
public:
  virtual ~TargetSet() = default;
  virtual int size() const = 0;
  virtual void begin_sample(uint64_t sample_seed) = 0;
  virtual void on_step(const Word& atom, const WalkState& position) = 0;
  virtual TargetVerdict query(int target, const WalkState& position) = 0;
};

using TargetSetFactory = std::function<std::unique_ptr<TargetSet>()>;

class SubgroupTargetSet final : public TargetSet {
public:
  explicit SubgroupTargetSet(std::vector<SubgroupOracle> subs) : subs_(std::move(subs)) {
    for (const auto& s : subs_) trackers_.push_back(s.tracker());
  }
  int size() const override { return static_cast<int>(trackers_.size()); }
  void begin_sample(uint64_t) override {
    for (auto& t : trackers_) t->reset();
  }
  void on_step(const Word& atom, const WalkState&) override {
    for (auto& t : trackers_) t->push(atom);
  }
  TargetVerdict query(int target, const WalkState&) override {
    return {trackers_[static_cast<size_t>(target)]->contains(), false};
  }

private:
  std::vector<SubgroupOracle> subs_;
  std::vector<std::unique_ptr<MembershipTracker>> trackers_;
};

// Subgroup membership intersected with a position predicate (the E-oracle of
// a restricted walk). The restricted accepting set is pointwise contained in
// the unrestricted one, so coupled hit counts are ordered exactly.
class RestrictedSubgroupTargetSet final : public TargetSet {
public:
  using Predicate = std::function<bool(const WalkState&)>;

  RestrictedSubgroupTargetSet(SubgroupOracle sub, Predicate in_E)
      : tracker_(sub.tracker()), in_E_(std::move(in_E)) {}
  int size() const override { return 1; }
  void begin_sample(uint64_t) override { tracker_->reset(); }
  void on_step(const Word& atom, const WalkState&) override { tracker_->push(atom); }
  TargetVerdict query(int, const WalkState& position) override {
    return {tracker_->contains() && in_E_(position), false};
  }

private:
  std::unique_ptr<MembershipTracker> tracker_;
  Predicate in_E_;
};

namespace detail {

inline uint64_t env_seed_for(uint64_t seed, int64_t sample) {
  return mix64(seed, static_cast<uint64_t>(sample) ^ 0x5bf0f1e2d3c4a596ULL);
}

inline void run_chunk(const MarkedGroup& group, const StepDistribution& nu, TargetSet& targets,
                      int K, int64_t begin, int64_t end, uint64_t seed,
                      std::vector<ReturnSeries>& out) {
  WalkState position(group);
  const auto& atoms = nu.atoms();
  for (int64_t i = begin; i < end; ++i) {
    rng_stream rng(seed, static_cast<uint64_t>(i));
    uint64_t sample_seed = env_seed_for(seed, i);
    position.reset();
    targets.begin_sample(sample_seed);
    for (int t = 1; t <= 2 * K; ++t) {
      const Word& atom = atoms[nu.sample_index(rng.uniform01())].element;
      position.push_word(atom);
      targets.on_step(atom, position);
      if ((t & 1) == 0) {
        int k = t / 2;
        for (int j = 0; j < targets.size(); ++j) {
          TargetVerdict v = targets.query(j, position);
          auto& s = out[static_cast<size_t>(j)];
          if (v.hit) {
            ++s.hits[static_cast<size_t>(k - 1)];
            ++s.hits_upper[static_cast<size_t>(k - 1)];
          } else if (v.undecided) {
            ++s.hits_upper[static_cast<size_t>(k - 1)];
            s.bracketed = true;
          }
        }
      }
    }
  }
  for (auto& s : out) s.samples = end - begin;
}

}  // namespace detail

// Sample N paths of 2K right-multiplication steps and count target hits at
// even times. Bit-identical output for fixed (seed, config) at any worker
// count: per-sample streams plus integer reductions.
inline std::vector<ReturnSeries> run_walk_series(const MarkedGroup& group,
                                                 const StepDistribution& nu,
                                                 const TargetSetFactory& make_targets, int K,
                                                 int64_t N, uint64_t seed, int workers = 1) {
  require(K >= 1, errc::invalid_argument, "K must be >= 1");
  require(N >= 1, errc::invalid_argument, "N must be >= 1");
  if (workers < 1) workers = 1;
  if (static_cast<int64_t>(workers) > N) workers = static_cast<int>(N);

  auto probe = make_targets();
  int targets = probe->size();

  auto zero_series = [&] {
    std::vector<ReturnSeries> v(static_cast<size_t>(targets));
    for (auto& s : v) s.init(K, 0);
    return v;
  };

  std::vector<std::vector<ReturnSeries>> partial(static_cast<size_t>(workers));
  std::vector<std::thread> pool;
  int64_t chunk = (N + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int64_t begin = static_cast<int64_t>(w) * chunk;
    int64_t end = std::min<int64_t>(N, begin + chunk);
    partial[static_cast<size_t>(w)] = zero_series();
    if (begin >= end) continue;
    if (workers == 1) {
      detail::run_chunk(group, nu, *probe, K, begin, end, seed, partial[static_cast<size_t>(w)]);
    } else {
      pool.emplace_back([&, w, begin, end] {
        auto ts = make_targets();
        detail::run_chunk(group, nu, *ts, K, begin, end, seed, partial[static_cast<size_t>(w)]);
      });
    }
  }
  for (auto& th : pool) th.join();

  std::vector<ReturnSeries> total = zero_series();
  for (auto& p : partial)
    for (size_t j = 0; j < total.size(); ++j) total[j].merge_counts(p[j]);
  return total;
}

inline ReturnSeries sample_return_series(const MarkedGroup& group, const SubgroupOracle& target,
                                         const StepDistribution& nu, int K, int64_t N,
                                         uint64_t seed, int workers = 1) {
  TargetSetFactory f = [&target] {
    return std::make_unique<SubgroupTargetSet>(std::vector<SubgroupOracle>{target});
  };
  return run_walk_series(group, nu, f, K, N, seed, workers)[0];
}

inline std::vector<ReturnSeries> coupled_series(const MarkedGroup& group,
                                                const std::vector<SubgroupOracle>& targets,
                                                const StepDistribution& nu, int K, int64_t N,
                                                uint64_t seed, int workers = 1) {
  TargetSetFactory f = [&targets] { return std::make_unique<SubgroupTargetSet>(targets); };
  return run_walk_series(group, nu, f, K, N, seed, workers);
}

}  // namespace cospect
