#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace theo {

struct SuiteCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The quick property checks behind `theo diagnose`: transform bounds and
/// symmetries, gradient-oracle integrity, Wasserstein estimator sanity,
/// lambda_max monotonicity, Gibbs oracle moments and the class-property probe.
std::vector<SuiteCheck> run_property_suite(std::uint64_t seed);

nlohmann::json suite_to_json(const std::vector<SuiteCheck>& checks);

}  // namespace theo
