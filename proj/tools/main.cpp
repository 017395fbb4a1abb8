// cospect: cospectral radii of walks relative to subgroups, subrelations,
// and percolation clusters, with exact finite-relation models and the
// constructive coamenability witnesses.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cospect/acceptance.hpp"
#include "cospect/commands.hpp"
#include "cospect/io.hpp"

namespace {

using cospect::json;

json load_config(const std::string& path) {
  std::ifstream f(path);
  cospect::require(f.good(), cospect::errc::config_error, "cannot read config " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    cospect::raise(cospect::errc::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  return j;
}

struct Options {
  std::string config_path;
  std::string out_path;
  std::string format = "json";
  int workers = 2;
  bool timing = false;
};

int emit(const std::string& command, const json& config, cospect::CommandResult result,
         const Options& opt, double wall_ms) {
  json envelope;
  envelope["schema_version"] = cospect::kSchemaVersion;
  envelope["build"] = cospect::kBuildId;
  envelope["command"] = command;
  envelope["config"] = config;
  envelope["payload"] = result.payload;
  if (opt.timing) envelope["wall_ms"] = wall_ms;

  if (!opt.out_path.empty()) {
    cospect::write_file(opt.out_path, envelope.dump(2) + "\n");
    std::string stem = opt.out_path;
    auto dot = stem.rfind(".json");
    if (dot != std::string::npos && dot == stem.size() - 5) stem = stem.substr(0, dot);
    for (const auto& [suffix, content] : result.artifacts)
      cospect::write_file(stem + suffix, content);
  } else if (opt.format == "csv" && !result.artifacts.empty()) {
    std::cout << result.artifacts.front().second;
  } else {
    std::cout << envelope.dump(2) << "\n";
  }
  std::cerr << "cospect " << command << ": exit " << result.exit_code << " (" << wall_ms
            << " ms)\n";
  return result.exit_code;
}

int run_command(const std::string& command, const Options& opt) {
  json config;
  cospect::CommandResult result;
  auto t0 = std::chrono::steady_clock::now();
  try {
    if (command == "verify") {
      cospect::AcceptanceOptions aopt;
      aopt.workers = opt.workers;
      if (!opt.config_path.empty()) {
        config = load_config(opt.config_path);
        cospect::check_keys(config, {"seed", "criteria"}, {"seed"}, "verify config");
        if (config.contains("criteria"))
          for (const auto& c : config.at("criteria")) aopt.only.push_back(c.get<std::string>());
      }
      auto criteria = cospect::run_acceptance(aopt);
      bool all = true;
      json rows = json::array();
      for (const auto& c : criteria) {
        all = all && c.passed;
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.id << "  " << c.name << "  ["
                  << c.details << "]  (" << c.seconds << " s)\n";
        rows.push_back({{"id", c.id},
                        {"name", c.name},
                        {"passed", c.passed},
                        {"details", c.details},
                        {"seconds", c.seconds}});
      }
      result.payload = {{"criteria", rows}, {"all_passed", all}};
      result.exit_code = all ? 0 : 2;
    } else {
      cospect::require(!opt.config_path.empty(), cospect::errc::config_error,
                       "--config is required");
      config = load_config(opt.config_path);
      if (command == "walk-radius")
        result = cospect::run_walk_radius(config, opt.workers);
      else if (command == "spectral-radius")
        result = cospect::run_spectral_radius(config, opt.workers);
      else if (command == "finrel")
        result = cospect::run_finrel(config, opt.workers);
      else if (command == "percolate")
        result = cospect::run_percolate(config, opt.workers);
      else if (command == "smallpieces")
        result = cospect::run_smallpieces(config, opt.workers);
      else if (command == "mean-ergodic")
        result = cospect::run_mean_ergodic(config, opt.workers);
      else
        cospect::raise(cospect::errc::config_error, "unknown command " + command);
    }
  } catch (const cospect::error& e) {
    result.payload = {{"error", {{"code", cospect::errc_name(e.code())}, {"message", e.what()}}}};
    result.exit_code = e.code() == cospect::errc::ball_too_large ? 2 : 1;
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    result.payload = {{"error", {{"code", "Unexpected"}, {"message", e.what()}}}};
    result.exit_code = 1;
    std::cerr << "error: " << e.what() << "\n";
  }
  double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return emit(command, config, std::move(result), opt, wall_ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cospectral radius estimation for walks, coset spaces, finite relations, "
               "and percolation clusters"};
  app.require_subcommand(1);

  Options opt;
  const std::vector<std::string> commands = {"walk-radius", "spectral-radius", "finrel",
                                             "percolate",   "smallpieces",     "mean-ergodic",
                                             "verify"};
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "experiment config (JSON)");
    sub->add_option("--out", opt.out_path, "output envelope path (.json); series land beside it");
    sub->add_option("--workers", opt.workers, "worker threads (results are worker-count independent)");
    sub->add_option("--format", opt.format, "stdout format when --out is omitted: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--timing", opt.timing, "embed wall time in the envelope");
  }

  CLI11_PARSE(app, argc, argv);
  return run_command(app.get_subcommands().front()->get_name(), opt);
}
