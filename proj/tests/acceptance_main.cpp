// Acceptance battery: one pass/fail line per criterion, nonzero exit on any
// failure. The same criteria back the CLI `verify` subcommand.

#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "cospect/acceptance.hpp"

int main(int argc, char** argv) {
  cospect::AcceptanceOptions opt;
  opt.workers = 2;
  for (int i = 1; i < argc; ++i) {
    if (std::strncmp(argv[i], "--workers=", 10) == 0)
      opt.workers = std::atoi(argv[i] + 10);
    else
      opt.only.push_back(argv[i]);  // e.g. ./acceptance A4 A9
  }

  auto results = cospect::run_acceptance(opt);
  bool all = true;
  double total = 0;
  for (const auto& c : results) {
    all = all && c.passed;
    total += c.seconds;
    std::printf("%s %-4s %-42s (%6.1f s)  %s\n", c.passed ? "PASS" : "FAIL", c.id.c_str(),
                c.name.c_str(), c.seconds, c.details.c_str());
  }
  std::printf("%s: %zu criteria, %.1f s total\n", all ? "ALL PASSED" : "FAILURES PRESENT",
              results.size(), total);
  return all ? 0 : 1;
}
