#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cospect/ergodic.hpp"
#include "cospect/relation.hpp"
#include "cospect/stepdist.hpp"
#include "cospect/subgroup.hpp"

namespace cospect {

// Schema-checked configuration ingestion. Unknown fields are rejected so a
// typo cannot silently change an experiment.

inline void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                       const std::set<std::string>& required, const std::string& ctx) {
  require(j.is_object(), errc::config_error, ctx + " must be a JSON object");
  for (const auto& [key, value] : j.items())
    require(allowed.count(key) > 0, errc::config_error, "unknown field '" + key + "' in " + ctx);
  for (const auto& key : required)
    require(j.contains(key), errc::config_error, "missing field '" + key + "' in " + ctx);
}

inline Word parse_word(const nlohmann::json& j, const std::string& ctx) {
  require(j.is_array(), errc::config_error, ctx + ": a word is an array of signed integers");
  Word w;
  for (const auto& v : j) {
    require(v.is_number_integer(), errc::config_error, ctx + ": word letters are integers");
    int64_t l = v.get<int64_t>();
    require(l != 0 && l >= INT32_MIN && l <= INT32_MAX, errc::config_error,
            ctx + ": letters are nonzero 32-bit integers");
    w.letters.push_back(static_cast<int32_t>(l));
  }
  return w;
}

inline MarkedGroup parse_group(const nlohmann::json& j) {
  check_keys(j, {"family", "rank", "order", "factors"}, {"family"}, "group");
  std::string family = j.at("family").get<std::string>();
  if (family == "free") {
    check_keys(j, {"family", "rank"}, {"family", "rank"}, "group(free)");
    return MarkedGroup::free_group(j.at("rank").get<int>());
  }
  if (family == "free_abelian") {
    check_keys(j, {"family", "rank"}, {"family", "rank"}, "group(free_abelian)");
    return MarkedGroup::free_abelian(j.at("rank").get<int>());
  }
  if (family == "cyclic") {
    check_keys(j, {"family", "order"}, {"family", "order"}, "group(cyclic)");
    return MarkedGroup::cyclic_finite(j.at("order").get<int>());
  }
  if (family == "direct_product") {
    check_keys(j, {"family", "factors"}, {"family", "factors"}, "group(direct_product)");
    std::vector<MarkedGroup> factors;
    for (const auto& f : j.at("factors")) factors.push_back(parse_group(f));
    return MarkedGroup::direct_product(std::move(factors));
  }
  raise(errc::config_error, "unknown group family '" + family + "'");
}

inline SubgroupOracle parse_subgroup(const nlohmann::json& j, const MarkedGroup& group) {
  check_keys(j, {"kind", "target", "images", "generator", "table"}, {"kind"}, "subgroup");
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "trivial") return SubgroupOracle::trivial(group);
  if (kind == "whole") return SubgroupOracle::whole(group);
  if (kind == "kernel_of_hom") {
    check_keys(j, {"kind", "target", "images"}, {"kind", "target", "images"},
               "subgroup(kernel_of_hom)");
    MarkedGroup target = parse_group(j.at("target"));
    std::vector<Word> images;
    for (const auto& w : j.at("images")) images.push_back(parse_word(w, "hom image"));
    return SubgroupOracle::kernel_of_hom(GroupHomomorphism(group, target, std::move(images)));
  }
  if (kind == "cyclic_generator") {
    check_keys(j, {"kind", "generator"}, {"kind", "generator"}, "subgroup(cyclic_generator)");
    return SubgroupOracle::cyclic_generator(group, j.at("generator").get<int>());
  }
  if (kind == "finite_index_table") {
    check_keys(j, {"kind", "table"}, {"kind", "table"}, "subgroup(finite_index_table)");
    CosetTable t;
    for (const auto& row : j.at("table")) t.table.push_back(row.get<std::vector<int32_t>>());
    return SubgroupOracle::finite_index_table(group, std::move(t));
  }
  raise(errc::config_error, "unknown subgroup kind '" + kind + "'");
}

inline StepDistribution parse_nu(const nlohmann::json& j, const MarkedGroup& group) {
  check_keys(j, {"uniform_on_generators", "atoms", "lazy"}, {}, "nu");
  StepDistribution nu = [&] {
    if (j.value("uniform_on_generators", false)) return StepDistribution::uniform_on_generators(group);
    require(j.contains("atoms"), errc::config_error,
            "nu needs either uniform_on_generators or atoms");
    std::vector<StepDistribution::Atom> atoms;
    for (const auto& a : j.at("atoms")) {
      check_keys(a, {"word", "prob"}, {"word", "prob"}, "nu atom");
      atoms.push_back({parse_word(a.at("word"), "nu atom"), a.at("prob").get<double>()});
    }
    return StepDistribution::from_atoms(group, atoms);
  }();
  if (j.value("lazy", false)) nu = nu.make_lazy();
  return nu;
}

inline FitModel parse_fit_model(const nlohmann::json& j) {
  return fit_model_from_name(j.value("model", std::string("loglinear-polycorrected")));
}

struct FitSpec {
  FitModel model = FitModel::loglinear_polycorrected;
  int k_lo = 0, k_hi = 0;  // 0 means default window

  static FitSpec parse(const nlohmann::json& j) {
    check_keys(j, {"model", "window"}, {}, "fit");
    FitSpec f;
    f.model = parse_fit_model(j);
    if (j.contains("window")) {
      auto w = j.at("window").get<std::vector<int>>();
      require(w.size() == 2, errc::config_error, "fit window is [k_lo, k_hi]");
      f.k_lo = w[0];
      f.k_hi = w[1];
    }
    return f;
  }

  std::pair<int, int> window_for(int K) const {
    if (k_lo == 0 && k_hi == 0) return default_window(K);
    return {k_lo, k_hi};
  }
};

inline uint64_t parse_seed(const nlohmann::json& j) {
  require(j.contains("seed"), errc::config_error,
          "seed is mandatory in configs (no wall-clock defaults)");
  return j.at("seed").get<uint64_t>();
}

inline std::vector<std::vector<int>> parse_permutations(const nlohmann::json& j,
                                                        const std::string& ctx) {
  std::vector<std::vector<int>> perms;
  require(j.is_array(), errc::config_error, ctx + " must be an array of permutations");
  for (const auto& p : j) perms.push_back(p.get<std::vector<int>>());
  return perms;
}

inline cmatrix parse_cmatrix(const nlohmann::json& j, const std::string& ctx) {
  cmatrix m;
  for (const auto& row : j) {
    cvector r;
    for (const auto& entry : row) {
      require(entry.is_array() && entry.size() == 2, errc::config_error,
              ctx + ": complex entries are [re, im]");
      r.emplace_back(entry[0].get<double>(), entry[1].get<double>());
    }
    m.push_back(std::move(r));
  }
  return m;
}

inline cvector parse_cvector(const nlohmann::json& j, const std::string& ctx) {
  cvector v;
  for (const auto& entry : j) {
    require(entry.is_array() && entry.size() == 2, errc::config_error,
            ctx + ": complex entries are [re, im]");
    v.emplace_back(entry[0].get<double>(), entry[1].get<double>());
  }
  return v;
}

}  // namespace cospect
