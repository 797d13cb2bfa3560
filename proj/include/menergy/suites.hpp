#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace menergy {

struct PropertyResult {
  std::string suite;
  std::string property;
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst = 0.0;      // largest observed violation measure
  double tolerance = 0.0;  // a check fails when its measure exceeds this
  bool pass() const { return failures == 0; }
};

/// Suite names accepted by run_check_suite, "all" excluded.
const std::vector<std::string>& suite_names();

/// Runs the named property suite ("all" runs every suite). `tamper` names a
/// property whose tolerance is replaced by an unattainable one.
std::vector<PropertyResult> run_check_suite(const std::string& name, std::uint64_t seed, unsigned threads,
                                            const std::string& tamper = {});

nlohmann::json to_json(const PropertyResult& r);

struct ExperimentResult {
  nlohmann::json report;
  std::string csv;  // plot data; the header row names the columns
  bool pass = false;
};

const std::vector<std::string>& experiment_names();

ExperimentResult run_experiment(const std::string& name, const nlohmann::json& params, unsigned threads);

}  // namespace menergy
