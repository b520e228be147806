#include "bridgemc/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "bridgemc/diagnostics.hpp"
#include "bridgemc/errors.hpp"
#include "bridgemc/harness/csv.hpp"
#include "bridgemc/harness/dataset_io.hpp"
#include "bridgemc/harness/trace_io.hpp"
#include "bridgemc/models.hpp"

namespace bridgemc::harness {

namespace {

std::uint64_t fold(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v + 0x9e3779b97f4a7c15ULL)); }

std::vector<double> nan_vector(std::size_t n) {
  return std::vector<double>(n, std::numeric_limits<double>::quiet_NaN());
}

std::shared_ptr<const Proposal> make_proposal(const SamplerSettings& s) {
  if (s.proposal == "iid_adapted") return std::make_shared<IidAdaptedProposal>(s.inflation);
  return nullptr;
}

SamplerConfig make_sampler_config(const ExperimentConfig& config, const SamplerSettings& s,
                                  const CellKey& cell, const StateSpaceModel& model,
                                  const Dataset& data) {
  SamplerConfig sc;
  sc.kind = s.kind;
  std::vector<double> sd = s.rw_sd;
  RwScale scale = s.rw_scale.value_or(config.model.id == "nonlinear_benchmark" ? RwScale::sqrt
                                                                                : RwScale::identity);
  if (sd.empty()) {
    if (const auto* iid = dynamic_cast<const IidGaussianModel*>(&model)) {
      sd = {std::sqrt(iid->posterior(data).var)};
    } else {
      sd = {0.15, 0.08};
    }
  }
  if (sd.size() != model.param_dim()) throw ConfigError("rw_sd has the wrong dimension");
  sc.rw = s.scale_by_length ? RwProposal::scaled_by_length(sd, cell.length, scale)
                            : RwProposal(sd, scale);
  sc.particles = cell.particles;
  sc.proposal = make_proposal(s);
  sc.intermediate_steps = cell.intermediate_steps;
  sc.schedule = s.schedule;
  sc.backward_sampling = s.backward_sampling;
  return sc;
}

ResultRow execute(const ExperimentConfig& config, const Dataset& full, const Job& job,
                  std::vector<std::string>& traces) {
  const auto start = std::chrono::steady_clock::now();
  ResultRow row;
  row.cell = job.cell;
  row.replicate = job.replicate;
  row.seed = job.seed;
  row.iterations = config.iterations;
  row.burn_in = config.effective_burn_in();
  const std::size_t d = config.model.id == "nonlinear_benchmark" ? 2 : 1;
  try {
    const ModelSpec model =
        make_model(config.model, config.model.id == "iid_gaussian" ? std::optional<double>(job.cell.a)
                                                                   : std::nullopt);
    const Dataset data = full.prefix(job.cell.length);
    const SamplerSettings& s = config.samplers[job.sampler_index];
    const SamplerConfig sc = make_sampler_config(config, s, job.cell, *model, data);

    ChainRngs rngs{RngStream(job.proposal_seed).derive(label_key("proposal")),
                   RngStream(job.seed).derive(label_key("kernel")), job.seed};
    ParamVector theta0;
    if (config.init == "truth") {
      theta0 = data.theta_true ? *data.theta_true : default_theta(config.model);
    } else {
      RngStream init = RngStream(job.proposal_seed).derive(label_key("init"));
      theta0 = model->sample_prior(init);
    }
    ChainState state = initial_state(*model, data, sc, rngs, theta0);
    RunOptions opts{config.iterations, config.effective_burn_in(), 0};
    const ChainTrace trace = run_chain(*model, data, sc, opts, std::move(state), rngs);
    const double scale = config.msjd_scale_by_length ? static_cast<double>(job.cell.length) : 1.0;
    const DiagnosticsReport rep = summarize(trace, scale);
    row.accept_rate = rep.accept_rate;
    row.iac = rep.iac.empty() ? nan_vector(d) : rep.iac;
    row.msjd = rep.msjd.empty() ? nan_vector(d) : rep.msjd;
    row.mean = rep.mean;
    row.sd = rep.sd;
    if (config.trace.kind != TraceMode::Kind::none) {
      const std::uint64_t thin = config.trace.kind == TraceMode::Kind::full ? 1 : config.trace.thin;
      const StoredTrace stored = thin_trace(trace, thin);
      const std::filesystem::path dir = std::filesystem::path(config.output_dir) / "traces";
      const std::string stem = (dir / trace_file_stem(job)).string();
      write_trace_binary(stem + ".bin", stored);
      write_trace_csv(stem + ".csv", stored, param_names(config.model));
      traces.push_back(stem + ".bin");
    }
  } catch (const std::exception& e) {
    row.status = "failed";
    row.error = e.what();
    row.accept_rate = std::numeric_limits<double>::quiet_NaN();
    row.iac = row.msjd = row.mean = row.sd = nan_vector(d);
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t master, const CellKey& cell, std::size_t replicate) {
  std::uint64_t h = fold(master, label_key(cell.sampler.c_str()));
  h = fold(h, cell.particles);
  h = fold(h, cell.intermediate_steps);
  h = fold(h, cell.length);
  h = fold(h, std::bit_cast<std::uint64_t>(cell.a));
  return fold(h, replicate);
}

std::uint64_t paired_proposal_seed(std::uint64_t master, std::size_t length, double a,
                                   std::size_t replicate) {
  std::uint64_t h = fold(master, label_key("paired"));
  h = fold(h, length);
  h = fold(h, std::bit_cast<std::uint64_t>(a));
  return fold(h, replicate);
}

std::vector<Job> plan_jobs(const ExperimentConfig& config) {
  config.validate();
  const std::vector<std::size_t> lengths =
      config.sweep.lengths.empty() ? std::vector<std::size_t>{config.data.length}
                                   : config.sweep.lengths;
  const bool iid = config.model.id == "iid_gaussian";
  const std::vector<double> as = config.sweep.a.empty() || !iid
                                     ? std::vector<double>{iid ? config.model.a : 0.0}
                                     : config.sweep.a;
  std::vector<Job> jobs;
  for (std::size_t si = 0; si < config.samplers.size(); ++si) {
    const SamplerSettings& s = config.samplers[si];
    std::vector<std::size_t> ns = config.sweep.particles;
    std::vector<std::size_t> ks = config.sweep.intermediate_steps;
    if (s.kind == SamplerKind::marginal_mh) ns = {0};
    if (s.kind != SamplerKind::mcmc_ais) ks = {0};
    for (double a : as) {
      for (std::size_t T : lengths) {
        for (std::size_t n : ns) {
          for (std::size_t k : ks) {
            const CellKey cell{s.label, n, k, T, a};
            for (std::size_t r = 0; r < config.replicates; ++r) {
              Job job{cell, si, r, cell_seed(config.seed, cell, r), 0};
              job.proposal_seed =
                  config.paired_seeds ? paired_proposal_seed(config.seed, T, a, r) : job.seed;
              jobs.push_back(job);
            }
          }
        }
      }
    }
  }
  return jobs;
}

std::size_t resolve_threads(std::size_t flag, std::size_t config_value) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("BRIDGEMC_THREADS")) {
    try {
      const unsigned long v = std::stoul(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("BRIDGEMC_THREADS is not a positive integer: '") + env + "'");
    }
  }
  if (config_value > 0) return config_value;
  return std::max(1u, std::thread::hardware_concurrency());
}

Dataset load_or_simulate(const ExperimentConfig& config) {
  Dataset data;
  if (config.data.source == "file") {
    if (!std::filesystem::exists(config.data.path)) {
      throw ConfigError("data file '" + config.data.path + "' does not exist");
    }
    data = read_dataset(config.data.path);
  } else {
    const ModelSpec model = make_model(config.model);
    const ParamVector theta =
        config.data.theta.empty() ? default_theta(config.model) : config.data.theta;
    std::size_t length = config.data.length;
    for (std::size_t T : config.sweep.lengths) length = std::max(length, T);
    RngStream rng(config.data.seed);
    try {
      data = simulate(*model, theta, length, rng);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("data.theta: ") + e.what());
    }
  }
  for (std::size_t T : config.sweep.lengths) {
    if (T > data.length()) {
      throw ConfigError("sweep length " + std::to_string(T) + " exceeds the dataset length " +
                        std::to_string(data.length()));
    }
  }
  return data;
}

std::string trace_file_stem(const Job& job) {
  char a[32];
  const auto end = std::to_chars(a, a + sizeof a, job.cell.a).ptr;
  std::ostringstream os;
  os << job.cell.sampler << "_N" << job.cell.particles << "_K" << job.cell.intermediate_steps
     << "_T" << job.cell.length << "_a" << std::string_view(a, end) << "_r" << job.replicate;
  return os.str();
}

RunOutput run_experiment(const ExperimentConfig& config, const Dataset& data, std::size_t threads) {
  const std::vector<Job> jobs = plan_jobs(config);
  std::vector<ResultRow> rows(jobs.size());
  std::vector<std::vector<std::string>> traces(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      rows[i] = execute(config, data, jobs[i], traces[i]);
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  RunOutput out;
  out.rows = std::move(rows);
  for (auto& t : traces) out.trace_files.insert(out.trace_files.end(), t.begin(), t.end());
  return out;
}

std::vector<std::string> result_header(const std::vector<std::string>& names) {
  std::vector<std::string> h{"sampler", "N",      "K",     "T",          "a",
                             "replicate", "seed", "status", "error",     "iterations",
                             "burn_in", "accept_rate"};
  for (const char* metric : {"iac", "msjd", "mean", "sd"}) {
    for (const auto& n : names) h.push_back(std::string(metric) + "_" + n);
  }
  h.push_back("wall_seconds");
  return h;
}

void write_results(const std::string& path, const std::vector<ResultRow>& rows,
                   const std::vector<std::string>& names) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write results '" + path + "'");
  write_record(out, result_header(names));
  for (const ResultRow& r : rows) {
    std::vector<std::string> f{r.cell.sampler,
                               std::to_string(r.cell.particles),
                               std::to_string(r.cell.intermediate_steps),
                               std::to_string(r.cell.length),
                               format_double(r.cell.a),
                               std::to_string(r.replicate),
                               std::to_string(r.seed),
                               r.status,
                               r.error,
                               std::to_string(r.iterations),
                               std::to_string(r.burn_in),
                               format_double(r.accept_rate)};
    for (const auto* v : {&r.iac, &r.msjd, &r.mean, &r.sd}) {
      for (std::size_t i = 0; i < names.size(); ++i) {
        f.push_back(format_double(i < v->size() ? (*v)[i] : std::numeric_limits<double>::quiet_NaN()));
      }
    }
    f.push_back(format_double(r.wall_seconds));
    write_record(out, f);
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<ResultRow> read_results(const std::string& path, std::vector<std::string>* names_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read results '" + path + "'");
  std::vector<std::string> rec;
  if (!read_record(in, rec)) throw std::runtime_error("empty results file '" + path + "'");
  std::vector<std::string> names;
  for (const auto& h : rec) {
    if (h.rfind("iac_", 0) == 0) names.push_back(h.substr(4));
  }
  if (rec != result_header(names)) {
    throw std::runtime_error("results file '" + path + "' has an unexpected header");
  }
  const std::size_t d = names.size();
  std::vector<ResultRow> rows;
  while (read_record(in, rec)) {
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != 13 + 4 * d) throw std::runtime_error("ragged row in '" + path + "'");
    ResultRow r;
    try {
      r.cell = {rec[0], std::stoul(rec[1]), std::stoul(rec[2]), std::stoul(rec[3]),
                parse_double(rec[4])};
      r.replicate = std::stoul(rec[5]);
      r.seed = std::stoull(rec[6]);
      r.status = rec[7];
      r.error = rec[8];
      r.iterations = std::stoul(rec[9]);
      r.burn_in = std::stoul(rec[10]);
      r.accept_rate = parse_double(rec[11]);
      std::size_t c = 12;
      for (auto* v : {&r.iac, &r.msjd, &r.mean, &r.sd}) {
        for (std::size_t i = 0; i < d; ++i) v->push_back(parse_double(rec[c++]));
      }
      r.wall_seconds = parse_double(rec[c]);
    } catch (const std::exception& e) {
      throw std::runtime_error("bad row in '" + path + "': " + e.what());
    }
    rows.push_back(std::move(r));
  }
  if (names_out) *names_out = names;
  return rows;
}

}  // namespace bridgemc::harness
