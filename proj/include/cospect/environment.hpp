#pragma once

#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "cospect/errors.hpp"
#include "cospect/rng.hpp"
#include "cospect/word.hpp"

namespace cospect {

// Deferred-decision environments: every random coordinate is a pure function
// of (seed, canonical key), revealed on demand. Re-querying a coordinate can
// never change it, and environments with shared seeds are automatically
// coupled through their shared uniforms.

// Bernoulli shift with coordinate bias p; E = {x : x(e) = 1}.
class BernoulliShiftEnv {
public:
  BernoulliShiftEnv(const MarkedGroup& group, double p, uint64_t seed)
      : group_(&group), p_(p), seed_(seed) {}

  bool coordinate(const Word& g) const {
    return bernoulli_bit(seed_, group_->key_bytes(group_->normal_form(g)), p_);
  }

  bool base_in_E() const { return coordinate(Word()); }
  const MarkedGroup& group() const { return *group_; }

private:
  const MarkedGroup* group_;
  double p_;
  uint64_t seed_;
};

// Membership oracle for the small-pieces subrelation: on E the class of x is
// its whole E-orbit, off E it is a singleton. The walk accumulated g, so the
// current point is g.x and its coordinate at the identity is x(g^{-1}).
inline bool smallpieces_membership(const BernoulliShiftEnv& env, const MarkedGroup& group,
                                   const Word& current) {
  if (env.base_in_E()) return env.coordinate(group.inverse(current));
  return group.is_identity(current);
}

enum class Connectivity { connected, disconnected, undecided };

// Union-find over revealed vertices; the final partition depends only on the
// set of revealed open edges, not on reveal order.
class ClusterIndex {
public:
  int id_of(const std::string& key) {
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(parent_.size());
    ids_.emplace(key, id);
    parent_.push_back(id);
    return id;
  }

  int find(int x) {
    while (parent_[static_cast<size_t>(x)] != x) {
      parent_[static_cast<size_t>(x)] = parent_[static_cast<size_t>(parent_[static_cast<size_t>(x)])];
      x = parent_[static_cast<size_t>(x)];
    }
    return x;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  }

  bool same(int a, int b) { return find(a) == find(b); }
  size_t size() const { return parent_.size(); }

private:
  std::unordered_map<std::string, int> ids_;
  std::vector<int> parent_;
};

// p-Bernoulli edge percolation on the Cayley graph of (group, gens). Edge
// uniforms are keyed by the unordered endpoint pair, so environments built
// from the same seed at different p have nested open-edge sets.
class PercolationEnv {
public:
  PercolationEnv(const MarkedGroup& group, std::vector<Word> gens, double p, uint64_t seed)
      : group_(&group), p_(p), seed_(seed) {
    require(!gens.empty(), errc::invalid_argument, "percolation needs a generating set");
    for (auto& g : gens) {
      Word nf = group.normal_form(g);
      require(!nf.empty(), errc::invalid_argument, "identity cannot be a percolation edge");
      gens_.push_back(std::move(nf));
    }
    // symmetric generating set: closed under inverses
    for (const auto& g : gens_) {
      Word inv = group.inverse(g);
      bool found = false;
      for (const auto& h : gens_)
        if (h == inv) {
          found = true;
          break;
        }
      require(found, errc::not_symmetric, "generating set must be symmetric");
    }
  }

  double p() const { return p_; }
  uint64_t seed() const { return seed_; }
  const MarkedGroup& group() const { return *group_; }
  const std::vector<Word>& gens() const { return gens_; }

  // x(a,b) = x(b,a): key by the sorted endpoint pair, length-prefixed so the
  // concatenation cannot alias across distinct pairs
  bool edge_open(const std::string& key_a, const std::string& key_b) const {
    const std::string& lo = key_a <= key_b ? key_a : key_b;
    const std::string& hi = key_a <= key_b ? key_b : key_a;
    std::string edge;
    edge.reserve(lo.size() + hi.size() + 4);
    uint32_t n = static_cast<uint32_t>(lo.size());
    for (int i = 0; i < 4; ++i) edge.push_back(static_cast<char>((n >> (8 * i)) & 0xff));
    edge += lo;
    edge += hi;
    return bernoulli_bit(seed_, edge, p_);
  }

  bool edge_open(const Word& a, const Word& b) const {
    return edge_open(group_->key_bytes(a), group_->key_bytes(b));
  }

  // trees admit an exact connectivity rule: the unique geodesic must be open
  bool cayley_is_tree() const {
    if (group_->family() == GroupFamily::free_group ||
        (group_->family() == GroupFamily::free_abelian && group_->generator_count() == 1)) {
      size_t expected = 2 * static_cast<size_t>(group_->generator_count());
      if (gens_.size() != expected) return false;
      for (const auto& g : gens_)
        if (g.size() != 1) return false;
      return true;
    }
    return false;
  }

private:
  const MarkedGroup* group_;
  double p_;
  uint64_t seed_;
  std::vector<Word> gens_;
};

namespace detail {

struct SideState {
  std::deque<Word> frontier;
  bool touched_window = false;  // saw an edge leaving the radius-W ball
  int64_t explored = 0;
};

}  // namespace detail

// Decide whether the walk position lies in the cluster relation: is the
// identity connected to current^{-1} in the revealed subgraph, using only
// edges inside the radius-W word ball? Bidirectional cluster exploration;
// either side certifying enclosure without a meet certifies disconnection in
// the infinite graph, and a verdict never flips as W grows.
inline Connectivity percolation_membership(const PercolationEnv& env, const Word& current,
                                           int64_t window) {
  const MarkedGroup& g = env.group();
  Word cur = g.normal_form(current);
  if (cur.empty()) return Connectivity::connected;
  if (static_cast<int64_t>(cur.size()) > window) return Connectivity::undecided;
  Word target = g.inverse(cur);

  if (env.cayley_is_tree()) {
    // open iff every geodesic prefix edge is open
    Word prefix;
    for (int32_t l : target.letters) {
      Word next = prefix;
      next.letters.push_back(l);
      if (!env.edge_open(prefix, next)) return Connectivity::disconnected;
      prefix = std::move(next);
    }
    return Connectivity::connected;
  }

  ClusterIndex clusters;
  std::string origin_key = g.key_bytes(Word());
  std::string target_key = g.key_bytes(target);
  int origin_id = clusters.id_of(origin_key);
  int target_id = clusters.id_of(target_key);

  detail::SideState side[2];
  side[0].frontier.push_back(Word());
  side[1].frontier.push_back(target);
  std::unordered_map<std::string, int> owner;  // which side discovered a vertex
  owner.emplace(origin_key, 0);
  owner.emplace(target_key, 1);

  auto expand = [&](int s) -> Connectivity {
    Word v = std::move(side[s].frontier.front());
    side[s].frontier.pop_front();
    std::string v_key = g.key_bytes(v);
    ++side[s].explored;
    for (const auto& gen : env.gens()) {
      Word w = g.multiply(v, gen);
      if (static_cast<int64_t>(w.size()) > window) {
        side[s].touched_window = true;
        continue;  // the edge leaves the window: out of reach, unrevealed
      }
      std::string w_key = g.key_bytes(w);
      if (!env.edge_open(v_key, w_key)) continue;
      auto it = owner.find(w_key);
      if (it == owner.end()) {
        owner.emplace(w_key, s);
        clusters.unite(clusters.id_of(v_key), clusters.id_of(w_key));
        side[s].frontier.push_back(std::move(w));
      } else {
        clusters.unite(clusters.id_of(v_key), clusters.id_of(w_key));
        if (clusters.same(origin_id, target_id)) return Connectivity::connected;
      }
    }
    return Connectivity::undecided;  // no verdict from this expansion
  };

  while (!side[0].frontier.empty() || !side[1].frontier.empty()) {
    int s;
    if (side[0].frontier.empty())
      s = 1;
    else if (side[1].frontier.empty())
      s = 0;
    else
      s = side[0].frontier.size() <= side[1].frontier.size() ? 0 : 1;
    if (expand(s) == Connectivity::connected) return Connectivity::connected;
    // a side that exhausted without touching the window is a finite cluster,
    // entirely revealed, and it does not contain the other endpoint
    if (side[s].frontier.empty() && !side[s].touched_window) return Connectivity::disconnected;
  }
  return Connectivity::undecided;
}

// Finite-volume proxy for membership in an infinite cluster: does the origin
// cluster reach the window boundary? Depth-first so that supercritical
// samples exit quickly.
inline bool u_infinity_proxy(const PercolationEnv& env, int64_t window) {
  require(window >= 1, errc::invalid_argument, "window must be >= 1");
  const MarkedGroup& g = env.group();
  std::vector<Word> stack;
  std::unordered_map<std::string, char> seen;
  stack.push_back(Word());
  seen.emplace(g.key_bytes(Word()), 1);
  while (!stack.empty()) {
    Word v = std::move(stack.back());
    stack.pop_back();
    std::string v_key = g.key_bytes(v);
    for (const auto& gen : env.gens()) {
      Word w = g.multiply(v, gen);
      std::string w_key = g.key_bytes(w);
      if (seen.count(w_key)) continue;
      if (!env.edge_open(v_key, w_key)) continue;
      if (static_cast<int64_t>(w.size()) >= window) return true;  // boundary reached
      seen.emplace(w_key, 1);
      stack.push_back(std::move(w));
    }
  }
  return false;
}

// Coupled environments: one uniform per edge shared across all levels, open
// at level p iff the uniform is below p, so open-edge sets are nested.
inline std::vector<PercolationEnv> monotone_coupled_envs(const MarkedGroup& group,
                                                         const std::vector<Word>& gens,
                                                         const std::vector<double>& p_levels,
                                                         uint64_t seed) {
  for (size_t i = 1; i < p_levels.size(); ++i)
    require(p_levels[i - 1] <= p_levels[i], errc::unsorted_levels,
            "p levels must be sorted ascending");
  std::vector<PercolationEnv> envs;
  envs.reserve(p_levels.size());
  for (double p : p_levels) envs.emplace_back(group, gens, p, seed);
  return envs;
}

}  // namespace cospect
