#ifndef BRIDGEMC_HARNESS_REPORT_HPP_
#define BRIDGEMC_HARNESS_REPORT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "bridgemc/harness/runner.hpp"

namespace bridgemc::harness {

struct CellSummary {
  CellKey cell;
  std::size_t rows = 0;
  std::size_t ok = 0;
  std::vector<double> mean_iac;
  std::vector<double> median_iac;
  std::vector<double> mean_msjd;
  double mean_accept = 0.0;
  // mean IAC of this cell over the reference sampler's mean IAC at the same
  // (T, a); NaN when no reference cell exists
  std::vector<double> iac_ratio;
  // "", "missing", "all_failed" or "partial"
  std::string flag;
};

// Groups rows by cell in first-appearance order. Cells in `expected` with no
// rows are appended and flagged "missing". An empty reference label selects
// the first sampler seen.
std::vector<CellSummary> aggregate(const std::vector<ResultRow>& rows, std::size_t param_dim,
                                   const std::vector<CellKey>& expected = {},
                                   const std::string& reference = "");

void write_report_csv(const std::string& path, const std::vector<CellSummary>& cells,
                      const std::vector<std::string>& param_names);

// Fixed-width text table, one line per cell.
std::string format_table(const std::vector<CellSummary>& cells,
                         const std::vector<std::string>& param_names);

// Distinct cells of a planned experiment, in job order.
std::vector<CellKey> expected_cells(const ExperimentConfig& config);

}  // namespace bridgemc::harness

#endif  // BRIDGEMC_HARNESS_REPORT_HPP_
