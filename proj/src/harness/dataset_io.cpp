#include "bridgemc/harness/dataset_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bridgemc/errors.hpp"
#include "bridgemc/harness/csv.hpp"

namespace bridgemc::harness {

namespace {

std::string meta_path(const std::string& path) { return path + ".meta.json"; }

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& data, const std::string& model_name) {
  data.validate();
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset '" + path + "'");
  const std::size_t dy = data.obs_dim;
  const std::size_t dx = data.x_true ? data.x_true->state_dim() : 0;
  std::vector<std::string> header{"t"};
  for (std::size_t i = 0; i < dy; ++i) header.push_back("y_" + std::to_string(i));
  for (std::size_t i = 0; i < dx; ++i) header.push_back("x_" + std::to_string(i));
  write_record(out, header);
  for (std::size_t t = 0; t < data.length(); ++t) {
    std::vector<std::string> row{std::to_string(t + 1)};
    for (double v : data.obs(t)) row.push_back(format_double(v));
    if (data.x_true) {
      for (double v : data.x_true->state(t)) row.push_back(format_double(v));
    }
    write_record(out, row);
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");

  nlohmann::json meta;
  meta["format_version"] = 1;
  meta["model"] = model_name;
  meta["T"] = data.length();
  meta["obs_dim"] = dy;
  meta["state_dim"] = dx;
  meta["theta_true"] = data.theta_true ? nlohmann::json(*data.theta_true) : nlohmann::json(nullptr);
  meta["seed"] = data.seed ? nlohmann::json(*data.seed) : nlohmann::json(nullptr);
  std::ofstream mout(meta_path(path), std::ios::binary);
  if (!mout) throw std::runtime_error("cannot write '" + meta_path(path) + "'");
  mout << meta.dump(2) << '\n';
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read dataset '" + path + "'");
  std::vector<std::string> rec;
  if (!read_record(in, rec) || rec.empty() || rec[0] != "t") {
    throw DomainError("dataset '" + path + "' lacks a t,y_0,... header");
  }
  std::size_t dy = 0, dx = 0;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    if (rec[i].rfind("y_", 0) == 0) {
      ++dy;
    } else if (rec[i].rfind("x_", 0) == 0) {
      ++dx;
    } else {
      throw DomainError("unexpected dataset column '" + rec[i] + "'");
    }
  }
  if (dy == 0) throw DomainError("dataset has no observation columns");
  Dataset data;
  data.obs_dim = dy;
  std::vector<double> x;
  const std::size_t width = 1 + dy + dx;
  while (read_record(in, rec)) {
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != width) throw DomainError("ragged dataset row in '" + path + "'");
    try {
      for (std::size_t i = 0; i < dy; ++i) data.y.push_back(parse_double(rec[1 + i]));
      for (std::size_t i = 0; i < dx; ++i) x.push_back(parse_double(rec[1 + dy + i]));
    } catch (const std::invalid_argument& e) {
      throw DomainError(std::string("dataset '") + path + "': " + e.what());
    }
  }
  if (dx > 0) data.x_true = LatentPath(std::move(x), dx);

  std::ifstream min(meta_path(path));
  if (min) {
    try {
      const auto meta = nlohmann::json::parse(min);
      if (meta.contains("theta_true") && !meta["theta_true"].is_null()) {
        data.theta_true = meta["theta_true"].get<ParamVector>();
      }
      if (meta.contains("seed") && !meta["seed"].is_null()) {
        data.seed = meta["seed"].get<std::uint64_t>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw DomainError("bad dataset sidecar '" + meta_path(path) + "': " + e.what());
    }
  }
  data.validate();
  return data;
}

}  // namespace bridgemc::harness
