#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "cospect/errors.hpp"
#include "cospect/stepdist.hpp"
#include "cospect/subgroup.hpp"
#include "cospect/word.hpp"

namespace cospect {

// Finite window onto the right-coset space: BFS over coset keys under right
// multiplication by the walk support. Edges leaving the ball are Boundary.
struct CosetBall {
  static constexpr int64_t boundary = -1;

  std::vector<std::string> keys;              // BFS order, state 0 = base coset
  std::vector<int> depth;
  std::vector<Word> reps;                     // first-visit representative words
  std::vector<std::vector<int64_t>> adjacency;  // [state][atom] -> state or boundary
  std::vector<Word> atoms;                    // column order of adjacency
  int radius = 0;
  std::unordered_map<std::string, int64_t> index;

  int64_t states() const { return static_cast<int64_t>(keys.size()); }

  // number of states with depth <= r (depths are contiguous in BFS order)
  int64_t states_within(int r) const {
    int64_t n = 0;
    while (n < states() && depth[static_cast<size_t>(n)] <= r) ++n;
    return n;
  }
};

inline CosetBall explore_ball(const MarkedGroup& group, const SubgroupOracle& sub,
                              const std::vector<Word>& support, int radius,
                              int64_t state_cap = 5000000) {
  require(radius >= 0, errc::invalid_argument, "ball radius must be >= 0");
  CosetBall ball;
  ball.radius = radius;
  for (const auto& a : support) ball.atoms.push_back(group.normal_form(a));

  Word base;  // identity coset
  ball.keys.push_back(sub.coset_key(base));
  ball.reps.push_back(base);
  ball.depth.push_back(0);
  ball.index.emplace(ball.keys[0], 0);

  // single pass in BFS order: states strictly inside the ball create their
  // missing neighbors, states on the sphere only link to what exists
  for (int64_t s = 0; s < ball.states(); ++s) {
    int d = ball.depth[static_cast<size_t>(s)];
    ball.adjacency.emplace_back(ball.atoms.size(), CosetBall::boundary);
    for (size_t ai = 0; ai < ball.atoms.size(); ++ai) {
      Word next = group.multiply(ball.reps[static_cast<size_t>(s)], ball.atoms[ai]);
      std::string key = sub.coset_key(next);
      auto it = ball.index.find(key);
      if (it != ball.index.end()) {
        ball.adjacency[static_cast<size_t>(s)][ai] = it->second;
      } else if (d < radius) {
        require(ball.states() < state_cap, errc::ball_too_large,
                "coset ball exceeds " + std::to_string(state_cap) + " states");
        int64_t idx = ball.states();
        ball.keys.push_back(key);
        ball.index.emplace(std::move(key), idx);
        ball.reps.push_back(std::move(next));
        ball.depth.push_back(d + 1);
        ball.adjacency[static_cast<size_t>(s)][ai] = idx;
      }
    }
  }
  return ball;
}

inline CosetBall explore_ball(const MarkedGroup& group, const SubgroupOracle& sub,
                              const StepDistribution& nu, int radius,
                              int64_t state_cap = 5000000) {
  std::vector<Word> support;
  for (const auto& a : nu.atoms())
    if (!a.element.empty()) support.push_back(a.element);
  return explore_ball(group, sub, support, radius, state_cap);
}

}  // namespace cospect
