#ifndef BRIDGEMC_HARNESS_RUNNER_HPP_
#define BRIDGEMC_HARNESS_RUNNER_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bridgemc/harness/config.hpp"

namespace bridgemc::harness {

// Coordinates of one sweep cell. Coordinates that do not apply to a sampler
// are recorded as 0 (N for marginal MH, K for everything but MCMC-AIS).
struct CellKey {
  std::string sampler;  // settings label
  std::size_t particles = 0;
  std::size_t intermediate_steps = 0;
  std::size_t length = 0;
  double a = 0.0;

  bool operator==(const CellKey&) const = default;
};

struct ResultRow {
  CellKey cell;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or "failed"
  std::string error;
  std::size_t iterations = 0;
  std::size_t burn_in = 0;
  double accept_rate = 0.0;
  std::vector<double> iac;
  std::vector<double> msjd;
  std::vector<double> mean;
  std::vector<double> sd;
  double wall_seconds = 0.0;
};

struct Job {
  CellKey cell;
  std::size_t sampler_index = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;           // kernel stream seed, recorded in the row
  std::uint64_t proposal_seed = 0;  // equals seed unless paired
};

// Deterministic enumeration of the sweep x replicate grid, with seeds that
// are pure functions of (master seed, cell coordinates, replicate). In paired
// mode the proposal seed ignores sampler, N and K.
std::vector<Job> plan_jobs(const ExperimentConfig& config);

std::uint64_t cell_seed(std::uint64_t master, const CellKey& cell, std::size_t replicate);
std::uint64_t paired_proposal_seed(std::uint64_t master, std::size_t length, double a,
                                   std::size_t replicate);

// --threads, then BRIDGEMC_THREADS, then config.threads, then hardware.
std::size_t resolve_threads(std::size_t flag, std::size_t config_value);

// Loads or simulates the full-length dataset described by the config.
Dataset load_or_simulate(const ExperimentConfig& config);

struct RunOutput {
  std::vector<ResultRow> rows;
  std::vector<std::string> trace_files;
};

// Runs every job on a worker pool. Failed cells yield rows with
// status "failed"; rows come back in job order.
RunOutput run_experiment(const ExperimentConfig& config, const Dataset& data, std::size_t threads);

std::vector<std::string> result_header(const std::vector<std::string>& param_names);
void write_results(const std::string& path, const std::vector<ResultRow>& rows,
                   const std::vector<std::string>& param_names);
std::vector<ResultRow> read_results(const std::string& path,
                                    std::vector<std::string>* param_names = nullptr);

std::string trace_file_stem(const Job& job);

}  // namespace bridgemc::harness

#endif  // BRIDGEMC_HARNESS_RUNNER_HPP_
