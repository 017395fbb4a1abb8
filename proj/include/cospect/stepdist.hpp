#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cospect/errors.hpp"
#include "cospect/rng.hpp"
#include "cospect/word.hpp"

namespace cospect {

// Symmetric step distribution on group elements. Atoms are stored in normal
// form with duplicates merged; symmetry means the atom set is closed under
// inversion with equal weights.
class StepDistribution {
public:
  struct Atom {
    Word element;
    double prob;
  };

  static StepDistribution from_atoms(const MarkedGroup& g, std::vector<Atom> atoms) {
    StepDistribution d;
    d.build(g, std::move(atoms));
    return d;
  }

  static StepDistribution uniform_on_generators(const MarkedGroup& g) {
    std::vector<Atom> atoms;
    int k = g.generator_count();
    for (int i = 1; i <= k; ++i) {
      atoms.push_back({word_of({i}), 1.0 / (2 * k)});
      atoms.push_back({word_of({-i}), 1.0 / (2 * k)});
    }
    StepDistribution d;
    d.build(g, std::move(atoms));
    return d;
  }

  // theta = nu/2 + delta_e/2 (forces aperiodicity)
  StepDistribution make_lazy() const {
    std::vector<Atom> atoms;
    atoms.push_back({Word(), 0.5});
    for (const auto& a : atoms_) atoms.push_back({a.element, a.prob / 2});
    StepDistribution d;
    d.build(*group_, std::move(atoms));
    return d;
  }

  bool is_lazy() const { return identity_mass() >= 0.5 - 1e-12; }

  double identity_mass() const {
    for (const auto& a : atoms_)
      if (a.element.empty()) return a.prob;
    return 0.0;
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const MarkedGroup& group() const { return *group_; }
  size_t support_size() const { return atoms_.size(); }

  size_t sample_index(double u01) const {
    for (size_t i = 0; i < cdf_.size(); ++i)
      if (u01 < cdf_[i]) return i;
    return atoms_.size() - 1;
  }

  std::vector<Word> support() const {
    std::vector<Word> s;
    s.reserve(atoms_.size());
    for (const auto& a : atoms_) s.push_back(a.element);
    return s;
  }

private:
  void build(const MarkedGroup& g, std::vector<Atom> raw) {
    group_ = std::make_shared<MarkedGroup>(g);
    require(!raw.empty(), errc::invalid_argument, "step distribution needs atoms");

    // merge duplicates by canonical key
    std::map<std::string, std::pair<Word, double>> merged;
    double total = 0;
    for (auto& a : raw) {
      require(a.prob >= 0, errc::invalid_argument, "negative atom probability");
      Word nf = g.normal_form(a.element);
      auto key = g.key_bytes(nf);
      auto it = merged.find(key);
      if (it == merged.end())
        merged.emplace(key, std::make_pair(std::move(nf), a.prob));
      else
        it->second.second += a.prob;
      total += a.prob;
    }
    require(std::fabs(total - 1.0) <= 1e-12, errc::invalid_argument,
            "atom probabilities sum to " + std::to_string(total) + ", expected 1");

    // symmetry: the inverse of each atom carries the same mass
    for (const auto& [key, wp] : merged) {
      Word inv = g.inverse(wp.first);
      auto it = merged.find(g.key_bytes(inv));
      require(it != merged.end() && std::fabs(it->second.second - wp.second) <= 1e-12,
              errc::not_symmetric, "step distribution not symmetric");
    }

    atoms_.clear();
    for (auto& [key, wp] : merged) atoms_.push_back({std::move(wp.first), wp.second});
    cdf_.clear();
    double acc = 0;
    for (const auto& a : atoms_) {
      acc += a.prob;
      cdf_.push_back(acc);
    }
    cdf_.back() = 1.0;
  }

  std::shared_ptr<MarkedGroup> group_;
  std::vector<Atom> atoms_;
  std::vector<double> cdf_;
};

}  // namespace cospect
