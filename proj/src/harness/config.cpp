#include "bridgemc/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bridgemc/errors.hpp"
#include "bridgemc/models.hpp"

namespace bridgemc::harness {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

RwScale parse_scale(const std::string& s) {
  if (s == "identity") return RwScale::identity;
  if (s == "sqrt") return RwScale::sqrt;
  throw ConfigError("rw_scale must be 'identity' or 'sqrt', got '" + s + "'");
}

SamplerSettings parse_sampler(const json& j) {
  reject_unknown(j,
                 {"kind", "label", "rw_sd", "rw_scale", "scale_by_length", "proposal", "inflation",
                  "backward_sampling", "schedule"},
                 "samplers[]");
  SamplerSettings s;
  std::string kind = "mcmc_ais";
  read(j, "kind", kind, "sampler");
  try {
    s.kind = sampler_kind_from_string(kind);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  read(j, "label", s.label, "sampler");
  if (s.label.empty()) s.label = kind;
  read(j, "rw_sd", s.rw_sd, "sampler");
  if (j.contains("rw_scale") && !j.at("rw_scale").is_null()) {
    std::string scale;
    read(j, "rw_scale", scale, "sampler");
    s.rw_scale = parse_scale(scale);
  }
  read(j, "scale_by_length", s.scale_by_length, "sampler");
  read(j, "proposal", s.proposal, "sampler");
  read(j, "inflation", s.inflation, "sampler");
  read(j, "backward_sampling", s.backward_sampling, "sampler");
  read(j, "schedule", s.schedule, "sampler");
  return s;
}

}  // namespace

TraceMode TraceMode::parse(const std::string& text) {
  TraceMode m;
  if (text == "none") return m;
  if (text == "full") {
    m.kind = Kind::full;
    return m;
  }
  if (text.rfind("thin:", 0) == 0) {
    const std::string n = text.substr(5);
    std::size_t used = 0;
    unsigned long long k = 0;
    try {
      k = std::stoull(n, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != n.size() || n.empty() || k == 0) {
      throw ConfigError("trace mode 'thin:K' needs a positive integer K, got '" + text + "'");
    }
    m.kind = Kind::thin;
    m.thin = k;
    return m;
  }
  throw ConfigError("trace mode must be none, thin:K or full, got '" + text + "'");
}

std::string TraceMode::to_string() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::full: return "full";
    case Kind::thin: return "thin:" + std::to_string(thin);
  }
  return "none";
}

void ExperimentConfig::validate() const {
  if (model.id != "iid_gaussian" && model.id != "nonlinear_benchmark") {
    throw ConfigError("unknown model id '" + model.id + "'");
  }
  if (data.source != "simulate" && data.source != "file") {
    throw ConfigError("data.source must be 'simulate' or 'file'");
  }
  if (data.source == "file" && data.path.empty()) throw ConfigError("data.path is required");
  if (data.source == "simulate" && data.length == 0) throw ConfigError("data.length must be >= 1");
  if (samplers.empty()) throw ConfigError("at least one sampler is required");
  if (sweep.particles.empty() || sweep.intermediate_steps.empty()) {
    throw ConfigError("sweep grids must be nonempty");
  }
  for (std::size_t n : sweep.particles) {
    if (n == 0) throw ConfigError("sweep.N entries must be positive");
  }
  for (std::size_t t : sweep.lengths) {
    if (t == 0) throw ConfigError("sweep.T entries must be positive");
  }
  for (double a : sweep.a) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("sweep.a entries must lie in [0, 1]");
    if (model.id != "iid_gaussian") throw ConfigError("sweep.a applies to the iid model only");
  }
  for (const auto& s : samplers) {
    if (s.kind == SamplerKind::mcmc_ais) {
      for (std::size_t k : sweep.intermediate_steps) {
        if (k == 0) throw ConfigError("MCMC-AIS needs K >= 1");
      }
    }
    if (s.kind == SamplerKind::marginal_mh && model.id != "iid_gaussian") {
      throw ConfigError("marginal_mh needs the iid model's exact likelihood");
    }
    if (s.proposal != "bootstrap" && s.proposal != "iid_adapted") {
      throw ConfigError("proposal must be 'bootstrap' or 'iid_adapted'");
    }
    if (s.proposal == "iid_adapted" && model.id != "iid_gaussian") {
      throw ConfigError("iid_adapted proposal applies to the iid model only");
    }
    if (!(s.inflation > 0.0)) throw ConfigError("inflation must be positive");
    for (double v : s.rw_sd) {
      if (!(v > 0.0)) throw ConfigError("rw_sd entries must be positive");
    }
  }
  if (replicates == 0) throw ConfigError("replicates must be >= 1");
  if (iterations <= effective_burn_in()) throw ConfigError("iterations must exceed burn_in");
  if (init != "prior" && init != "truth") throw ConfigError("init must be 'prior' or 'truth'");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"model", "data", "samplers", "sweep", "replicates", "iterations", "burn_in", "init",
                  "paired_seeds", "msjd_scale_by_T", "seed", "output_dir", "trace", "threads"},
                 "config");
  ExperimentConfig c;
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m,
                   {"id", "a", "sigma_x2", "sigma_y2", "prior_mean", "prior_var", "prior_shape",
                    "prior_scale"},
                   "model");
    read(m, "id", c.model.id, "model");
    read(m, "a", c.model.a, "model");
    read(m, "sigma_x2", c.model.sigma_x2, "model");
    read(m, "sigma_y2", c.model.sigma_y2, "model");
    read(m, "prior_mean", c.model.prior_mean, "model");
    read(m, "prior_var", c.model.prior_var, "model");
    read(m, "prior_shape", c.model.prior_shape, "model");
    read(m, "prior_scale", c.model.prior_scale, "model");
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown(d, {"source", "path", "theta", "T", "seed"}, "data");
    read(d, "source", c.data.source, "data");
    read(d, "path", c.data.path, "data");
    read(d, "theta", c.data.theta, "data");
    read(d, "T", c.data.length, "data");
    read(d, "seed", c.data.seed, "data");
  }
  if (j.contains("samplers")) {
    if (!j.at("samplers").is_array()) throw ConfigError("samplers must be an array");
    for (const json& s : j.at("samplers")) c.samplers.push_back(parse_sampler(s));
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, {"N", "K", "T", "a"}, "sweep");
    read(s, "N", c.sweep.particles, "sweep");
    read(s, "K", c.sweep.intermediate_steps, "sweep");
    read(s, "T", c.sweep.lengths, "sweep");
    read(s, "a", c.sweep.a, "sweep");
  }
  read(j, "replicates", c.replicates, "config");
  read(j, "iterations", c.iterations, "config");
  if (j.contains("burn_in") && !j.at("burn_in").is_null()) {
    std::size_t b = 0;
    read(j, "burn_in", b, "config");
    c.burn_in = b;
  }
  read(j, "init", c.init, "config");
  read(j, "paired_seeds", c.paired_seeds, "config");
  read(j, "msjd_scale_by_T", c.msjd_scale_by_length, "config");
  read(j, "seed", c.seed, "config");
  read(j, "output_dir", c.output_dir, "config");
  if (j.contains("trace")) {
    std::string t;
    read(j, "trace", t, "config");
    c.trace = TraceMode::parse(t);
  }
  read(j, "threads", c.threads, "config");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"id", c.model.id},           {"a", c.model.a},
                {"sigma_x2", c.model.sigma_x2}, {"sigma_y2", c.model.sigma_y2},
                {"prior_mean", c.model.prior_mean}, {"prior_var", c.model.prior_var},
                {"prior_shape", c.model.prior_shape}, {"prior_scale", c.model.prior_scale}};
  j["data"] = {{"source", c.data.source}, {"path", c.data.path}, {"theta", c.data.theta},
               {"T", c.data.length},      {"seed", c.data.seed}};
  j["samplers"] = json::array();
  for (const auto& s : c.samplers) {
    json sj = {{"kind", to_string(s.kind)},
               {"label", s.label},
               {"rw_sd", s.rw_sd},
               {"scale_by_length", s.scale_by_length},
               {"proposal", s.proposal},
               {"inflation", s.inflation},
               {"backward_sampling", s.backward_sampling},
               {"schedule", s.schedule}};
    if (s.rw_scale) sj["rw_scale"] = *s.rw_scale == RwScale::identity ? "identity" : "sqrt";
    j["samplers"].push_back(sj);
  }
  j["sweep"] = {{"N", c.sweep.particles},
                {"K", c.sweep.intermediate_steps},
                {"T", c.sweep.lengths},
                {"a", c.sweep.a}};
  j["replicates"] = c.replicates;
  j["iterations"] = c.iterations;
  j["burn_in"] = c.effective_burn_in();
  j["init"] = c.init;
  j["paired_seeds"] = c.paired_seeds;
  j["msjd_scale_by_T"] = c.msjd_scale_by_length;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["trace"] = c.trace.to_string();
  j["threads"] = c.threads;
  return j.dump(2);
}

ModelSpec make_model(const ModelConfig& c, std::optional<double> a) {
  try {
    if (c.id == "iid_gaussian") {
      return iid_gaussian_model(a.value_or(c.a), c.sigma_x2, c.sigma_y2, c.prior_mean, c.prior_var);
    }
    if (c.id == "nonlinear_benchmark") return nonlinear_benchmark_model(c.prior_shape, c.prior_scale);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  throw ConfigError("unknown model id '" + c.id + "'");
}

ParamVector default_theta(const ModelConfig& c) {
  if (c.id == "nonlinear_benchmark") return {100.0, 1.0};
  return {0.0};
}

std::vector<std::string> param_names(const ModelConfig& c) {
  if (c.id == "nonlinear_benchmark") return {"sigma_v2", "sigma_w2"};
  return {"theta"};
}

}  // namespace bridgemc::harness
