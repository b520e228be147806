#include "bridgemc/harness/commands.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bridgemc/diagnostics.hpp"
#include "bridgemc/harness/csv.hpp"
#include "bridgemc/harness/dataset_io.hpp"
#include "bridgemc/harness/report.hpp"
#include "bridgemc/harness/trace_io.hpp"

namespace bridgemc::harness {

std::string cmd_simulate(const ExperimentConfig& config) {
  if (config.data.source != "simulate") throw ConfigError("simulate needs data.source = simulate");
  const Dataset data = load_or_simulate(config);
  const std::string path = (std::filesystem::path(config.output_dir) / "data.csv").string();
  write_dataset(path, data, config.model.id);
  return path;
}

RunOutput cmd_run(const ExperimentConfig& config, std::size_t threads) {
  const Dataset data = load_or_simulate(config);
  std::filesystem::create_directories(config.output_dir);
  RunOutput out = run_experiment(config, data, threads);
  write_results((std::filesystem::path(config.output_dir) / "results.csv").string(), out.rows,
                param_names(config.model));
  std::ofstream((std::filesystem::path(config.output_dir) / "config.json").string(),
                std::ios::binary)
      << config_to_json(config) << '\n';
  return out;
}

std::string cmd_report(const std::vector<std::string>& files, const std::string& out_dir,
                       const std::optional<ExperimentConfig>& config, const std::string& reference) {
  if (files.empty()) throw ConfigError("report needs at least one results file");
  std::vector<ResultRow> rows;
  std::vector<std::string> names;
  for (const auto& f : files) {
    std::vector<std::string> n;
    auto r = read_results(f, &n);
    if (!names.empty() && n != names) throw ConfigError("results files disagree on parameters");
    names = n;
    rows.insert(rows.end(), r.begin(), r.end());
  }
  const std::vector<CellKey> expected = config ? expected_cells(*config) : std::vector<CellKey>{};
  const auto cells = aggregate(rows, names.size(), expected, reference);
  write_report_csv((std::filesystem::path(out_dir) / "report.csv").string(), cells, names);
  return format_table(cells, names);
}

std::string cmd_diagnose(const std::vector<std::string>& files, double msjd_scale) {
  std::ostringstream os;
  write_record(os, {"file", "parameter", "samples", "accept_rate", "iac", "ess", "ess_batch_means",
                    "msjd", "mean", "sd"});
  for (const auto& f : files) {
    const StoredTrace s = read_trace_binary(f);
    const DiagnosticsReport r = summarize(s.chain, msjd_scale);
    for (std::size_t i = 0; i < s.chain.param_dim; ++i) {
      const bool has_iac = i < r.iac.size();
      write_record(os, {f, std::to_string(i), std::to_string(r.n_samples),
                        format_double(r.accept_rate), has_iac ? format_double(r.iac[i]) : "nan",
                        has_iac ? format_double(r.ess[i]) : "nan",
                        has_iac ? format_double(r.ess_batch_means[i]) : "nan",
                        i < r.msjd.size() ? format_double(r.msjd[i]) : "nan",
                        format_double(r.mean[i]), format_double(r.sd[i])});
    }
  }
  return os.str();
}

}  // namespace bridgemc::harness
