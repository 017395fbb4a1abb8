#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cospect/ball.hpp"
#include "cospect/errors.hpp"
#include "cospect/subgroup.hpp"

namespace cospect {

struct FolnerResult {
  int radius = 0;                  // first r whose metric ball certifies
  std::vector<int64_t> states;     // the ball B_r as state indices
  std::vector<double> ratios;      // |gamma B_r  symdiff  B_r| / |B_r| per phi element
  bool found = false;
};

// Search the metric balls B_r for a (Phi, eps)-Folner set of the coset
// action: |gamma B Δ B| < eps |B| for every gamma in Phi. Translates that
// leave the explored ball count as boundary crossings. Not finding one is
// reported as such, never as a proof of failure.
inline FolnerResult folner_search(const CosetBall& ball, const MarkedGroup& group,
                                  const SubgroupOracle& sub, const std::vector<Word>& phi,
                                  double eps) {
  require(!phi.empty(), errc::invalid_argument, "phi must be nonempty");
  require(eps > 0, errc::invalid_argument, "eps must be positive");

  FolnerResult out;
  // translate targets for every state once per phi element
  std::vector<std::vector<int64_t>> image(phi.size());
  for (size_t pi = 0; pi < phi.size(); ++pi) {
    image[pi].assign(static_cast<size_t>(ball.states()), CosetBall::boundary);
    for (int64_t s = 0; s < ball.states(); ++s) {
      Word moved = group.multiply(ball.reps[static_cast<size_t>(s)], phi[pi]);
      auto it = ball.index.find(sub.coset_key(moved));
      if (it != ball.index.end()) image[pi][static_cast<size_t>(s)] = it->second;
    }
  }

  for (int r = 0; r <= ball.radius; ++r) {
    int64_t size = ball.states_within(r);
    if (size == 0) continue;
    std::vector<double> ratios;
    double worst = 0;
    for (size_t pi = 0; pi < phi.size(); ++pi) {
      int64_t crossings = 0;
      for (int64_t s = 0; s < size; ++s) {
        int64_t t = image[pi][static_cast<size_t>(s)];
        if (t == CosetBall::boundary || ball.depth[static_cast<size_t>(t)] > r) ++crossings;
      }
      // gamma acts bijectively on cosets, so |gamma B \ B| = |B \ gamma B|
      double ratio = 2.0 * static_cast<double>(crossings) / static_cast<double>(size);
      ratios.push_back(ratio);
      worst = std::max(worst, ratio);
    }
    if (worst < eps) {
      out.found = true;
      out.radius = r;
      out.ratios = std::move(ratios);
      for (int64_t s = 0; s < size; ++s) out.states.push_back(s);
      return out;
    }
  }
  out.found = false;
  return out;
}

}  // namespace cospect
