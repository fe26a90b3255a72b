#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace biot {

// Executes one configuration file end to end and writes the run artifacts
// (echoed config, summary.json, CSV outputs) into out_dir.
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.
// forced_mode, when nonempty, is the CLI subcommand; it must agree with
// the config's "mode" field when both are present.
int run_scenario(const std::string& config_path, const std::string& out_dir, bool quiet,
                 const std::string& forced_mode = "");

}  // namespace biot
