#pragma once

// Named self-verification suites. Each suite draws its randomness from
// RandomStream(seed).substream(suite index), so a suite gives the same result
// whether it runs alone or as part of "all". Reports carry no timings and are
// byte-stable for a given seed.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgq/stats.hpp"

namespace bgq {

struct Check {
  std::string name;
  bool passed = false;
  nlohmann::json detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;       // exact and tolerance checks
  std::vector<TestResult> tests;   // statistical tests, Bonferroni-adjusted per suite
  bool passed() const;
};

// "distributions", "queue", "tandem", "perc", "tc".
const std::vector<std::string>& suite_names();

// Runs one suite, or every suite for "all". Throws std::invalid_argument for
// an unknown name.
std::vector<SuiteReport> run_verification(const std::string& suite, std::uint64_t seed);

nlohmann::json to_json(const SuiteReport& report);

// {"seed": .., "suites": [..], "passed": ..}
nlohmann::json verification_report(const std::vector<SuiteReport>& reports, std::uint64_t seed);

}  // namespace bgq
