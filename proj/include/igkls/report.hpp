#pragma once

#include <optional>
#include <string>
#include <vector>

#include "igkls/io.hpp"

namespace igkls {

struct RunOptions {
    Tolerances tol;
    std::uint64_t seed = 0;
    // gauge-compare: "full" or "algebra".
    std::string mode = "full";
    // probe sample times.
    std::vector<double> times{0.1, 1.0, 10.0};
    // semicausal subsystem dimensions; 0 means take them from the payload.
    int d_a = 0;
    int d_b = 0;
    // random: bundle kind and generation parameters.
    std::string kind = "gkls";
    json params = json::object();
};

struct RunResult {
    int exit_code = 0;
    json report;
    // Bundle written by --out when the command produces one.
    std::optional<InstanceBundle> artifact;
};

const std::vector<std::string>& command_names();

// Never throws: errors become exit code 1 (verification) or 2 (input/usage).
RunResult run_command(const std::string& command, const std::vector<InstanceBundle>& bundles, const RunOptions& opt);

std::string render_text(const json& report);

}  // namespace igkls
