#pragma once

#include <string>
#include <vector>

#include "lab/report.hpp"

namespace dlab::lab {

const std::vector<std::string>& scenario_ids();

// Runs parameters.id with the remaining parameters as overrides of the
// scenario defaults. Verdict is pass (exit 0), fail (2) or inconclusive (3).
RunOutput run_scenario(const LabConfig& cfg);

}  // namespace dlab::lab
