#include "bridgemc/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "bridgemc/harness/csv.hpp"

namespace bridgemc::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<CellSummary> aggregate(const std::vector<ResultRow>& rows, std::size_t d,
                                   const std::vector<CellKey>& expected,
                                   const std::string& reference) {
  std::vector<CellKey> order;
  for (const ResultRow& r : rows) {
    if (std::find(order.begin(), order.end(), r.cell) == order.end()) order.push_back(r.cell);
  }
  std::vector<CellSummary> out;
  for (const CellKey& key : order) {
    CellSummary c;
    c.cell = key;
    std::vector<std::vector<double>> iac(d), msjd(d);
    std::vector<double> acc;
    for (const ResultRow& r : rows) {
      if (!(r.cell == key)) continue;
      ++c.rows;
      if (r.status != "ok") continue;
      ++c.ok;
      acc.push_back(r.accept_rate);
      for (std::size_t i = 0; i < d && i < r.iac.size(); ++i) {
        if (!std::isnan(r.iac[i])) iac[i].push_back(r.iac[i]);
        if (i < r.msjd.size() && !std::isnan(r.msjd[i])) msjd[i].push_back(r.msjd[i]);
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      c.mean_iac.push_back(mean(iac[i]));
      c.median_iac.push_back(median(iac[i]));
      c.mean_msjd.push_back(mean(msjd[i]));
    }
    c.mean_accept = mean(acc);
    if (c.ok == 0) {
      c.flag = "all_failed";
    } else if (c.ok < c.rows) {
      c.flag = "partial";
    }
    out.push_back(std::move(c));
  }
  for (const CellKey& key : expected) {
    if (std::find(order.begin(), order.end(), key) != order.end()) continue;
    CellSummary c;
    c.cell = key;
    c.mean_iac = c.median_iac = c.mean_msjd = std::vector<double>(d, kNaN);
    c.mean_accept = kNaN;
    c.flag = "missing";
    out.push_back(std::move(c));
  }

  const std::string ref = reference.empty() && !out.empty() ? out.front().cell.sampler : reference;
  for (CellSummary& c : out) {
    const CellSummary* best = nullptr;
    for (const CellSummary& r : out) {
      if (r.cell.sampler != ref || r.cell.length != c.cell.length || r.cell.a != c.cell.a) continue;
      if (r.ok == 0) continue;
      const bool exact = r.cell.particles == c.cell.particles &&
                         r.cell.intermediate_steps == c.cell.intermediate_steps;
      if (best == nullptr || exact) best = &r;
      if (exact) break;
    }
    for (std::size_t i = 0; i < d; ++i) {
      c.iac_ratio.push_back(best != nullptr && c.ok > 0 ? c.mean_iac[i] / best->mean_iac[i] : kNaN);
    }
  }
  return out;
}

void write_report_csv(const std::string& path, const std::vector<CellSummary>& cells,
                      const std::vector<std::string>& names) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report '" + path + "'");
  std::vector<std::string> h{"sampler", "N", "K", "T", "a", "rows", "ok", "flag", "mean_accept"};
  for (const char* metric : {"mean_iac", "median_iac", "mean_msjd", "iac_ratio"}) {
    for (const auto& n : names) h.push_back(std::string(metric) + "_" + n);
  }
  write_record(out, h);
  for (const CellSummary& c : cells) {
    std::vector<std::string> f{c.cell.sampler,
                               std::to_string(c.cell.particles),
                               std::to_string(c.cell.intermediate_steps),
                               std::to_string(c.cell.length),
                               format_double(c.cell.a),
                               std::to_string(c.rows),
                               std::to_string(c.ok),
                               c.flag,
                               format_double(c.mean_accept)};
    for (const auto* v : {&c.mean_iac, &c.median_iac, &c.mean_msjd, &c.iac_ratio}) {
      for (std::size_t i = 0; i < names.size(); ++i) f.push_back(format_double((*v)[i]));
    }
    write_record(out, f);
  }
}

std::string format_table(const std::vector<CellSummary>& cells,
                         const std::vector<std::string>& names) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-14s %6s %3s %7s %6s %5s %7s", "sampler", "N", "K", "T", "a",
                "ok", "accept");
  os << buf;
  for (const auto& n : names) {
    std::snprintf(buf, sizeof(buf), " %12s %12s %9s", ("iac_" + n).c_str(), ("med_" + n).c_str(),
                  "ratio");
    os << buf;
  }
  os << "  flag\n";
  for (const CellSummary& c : cells) {
    std::snprintf(buf, sizeof(buf), "%-14s %6zu %3zu %7zu %6.3g %2zu/%-2zu %7.3f",
                  c.cell.sampler.c_str(), c.cell.particles, c.cell.intermediate_steps,
                  c.cell.length, c.cell.a, c.ok, c.rows, c.mean_accept);
    os << buf;
    for (std::size_t i = 0; i < names.size(); ++i) {
      std::snprintf(buf, sizeof(buf), " %12.4g %12.4g %9.3g", c.mean_iac[i], c.median_iac[i],
                    c.iac_ratio[i]);
      os << buf;
    }
    os << "  " << c.flag << '\n';
  }
  return os.str();
}

std::vector<CellKey> expected_cells(const ExperimentConfig& config) {
  std::vector<CellKey> cells;
  for (const Job& j : plan_jobs(config)) {
    if (std::find(cells.begin(), cells.end(), j.cell) == cells.end()) cells.push_back(j.cell);
  }
  return cells;
}

}  // namespace bridgemc::harness
