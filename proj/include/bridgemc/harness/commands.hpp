#ifndef BRIDGEMC_HARNESS_COMMANDS_HPP_
#define BRIDGEMC_HARNESS_COMMANDS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bridgemc/harness/config.hpp"
#include "bridgemc/harness/runner.hpp"

namespace bridgemc::harness {

// Writes <output_dir>/data.csv (and its sidecar) from the config's simulation
// settings. Returns the dataset path.
std::string cmd_simulate(const ExperimentConfig& config);

// Runs the sweep and writes <output_dir>/results.csv; traces go to
// <output_dir>/traces when enabled.
RunOutput cmd_run(const ExperimentConfig& config, std::size_t threads);

// Aggregates result files into <out_dir>/report.csv and returns the text
// table. With a config, cells it plans but the files lack are flagged.
std::string cmd_report(const std::vector<std::string>& result_files, const std::string& out_dir,
                       const std::optional<ExperimentConfig>& config,
                       const std::string& reference = "");

// Per-parameter diagnostics of stored traces as CSV text.
std::string cmd_diagnose(const std::vector<std::string>& trace_files, double msjd_scale);

}  // namespace bridgemc::harness

#endif  // BRIDGEMC_HARNESS_COMMANDS_HPP_
