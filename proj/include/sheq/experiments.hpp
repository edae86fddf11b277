#pragma once

// Named experiments over the library: each produces results.csv,
// summary.json (always embedding the resolved config) and, where a log-log
// curve exists, plot.svg.  Exit codes: 0 success, 1 usage error,
// 2 acceptance-threshold failure, 3 divergent / degraded runs.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sheq/config.hpp"

namespace sheq {

struct RunOutcome {
    int exit_code = 0;
    nlohmann::json summary;
};

/// Runs cfg.experiment and writes its artifacts under cfg.output_dir.
RunOutcome run_experiment(const Config& cfg, std::ostream& log);

/// What the experiment exercises and the expected outcome.
/// Throws ConfigError for unknown names, listing the valid ones.
std::string describe_experiment(const std::string& name);

/// Build identifier baked in by the build system.
const char* build_describe();

} // namespace sheq
