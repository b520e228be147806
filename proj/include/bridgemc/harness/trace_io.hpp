#ifndef BRIDGEMC_HARNESS_TRACE_IO_HPP_
#define BRIDGEMC_HARNESS_TRACE_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "bridgemc/samplers.hpp"

namespace bridgemc::harness {

inline constexpr std::uint32_t kTraceFormatVersion = 1;

// A chain trace as stored on disk, possibly thinned. iteration_index[n] is
// the chain iteration of record n; chain.burn_in counts stored records.
struct StoredTrace {
  ChainTrace chain;
  std::vector<std::uint64_t> iteration_index;
  std::uint64_t thin = 1;
  std::uint64_t total_iterations = 0;
};

// Keeps every `thin`-th iteration (the last of each block of `thin`).
StoredTrace thin_trace(const ChainTrace& trace, std::uint64_t thin);

// Columnar little-endian binary: magic "BMCTRACE", version, sizes, then one
// contiguous block per column, then latent snapshots.
void write_trace_binary(const std::string& path, const StoredTrace& trace);
StoredTrace read_trace_binary(const std::string& path);

// One row per stored iteration: iteration, theta columns, accepted, log_r,
// increment columns.
void write_trace_csv(const std::string& path, const StoredTrace& trace,
                     const std::vector<std::string>& param_names);

}  // namespace bridgemc::harness

#endif  // BRIDGEMC_HARNESS_TRACE_IO_HPP_
