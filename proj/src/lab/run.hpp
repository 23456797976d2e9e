#pragma once

#include <iosfwd>

#include "lab/report.hpp"

namespace dlab::lab {

// Runs the configured experiment without touching the filesystem.
RunOutput execute(const LabConfig& cfg);

// execute + write_outputs + a one-line summary on `log`. Returns the exit code.
int run(const LabConfig& cfg, std::ostream& log);

int exit_code_for(Outcome o);

// {"max_support", "span", "coeff_bound"} under `key`, on the config window.
VectorSampler sampler_from(const Fields& p, const std::string& key, VectorSampler fallback);
// {"residual_slack", "max_iters", "stall_eps", "alpha_floor"} under "tolerances".
HitTolerances tolerances_from(const Fields& p);
DetectOptions detect_options_from(const Fields& p);

std::string utc_timestamp();

}  // namespace dlab::lab
