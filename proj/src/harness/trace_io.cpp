#include "bridgemc/harness/trace_io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "bridgemc/harness/csv.hpp"

namespace bridgemc::harness {

namespace {

constexpr char kMagic[8] = {'B', 'M', 'C', 'T', 'R', 'A', 'C', 'E'};

static_assert(sizeof(double) == 8, "trace format assumes 64-bit doubles");

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void put_block(std::ostream& out, const std::vector<T>& v) {
  if (!v.empty()) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated trace file");
  return v;
}

template <typename T>
std::vector<T> get_block(std::istream& in, std::size_t n) {
  std::vector<T> v(n);
  if (n > 0 && !in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
    throw std::runtime_error("truncated trace file");
  }
  return v;
}

}  // namespace

StoredTrace thin_trace(const ChainTrace& trace, std::uint64_t thin) {
  if (thin == 0) throw std::invalid_argument("thinning factor must be positive");
  StoredTrace s;
  s.thin = thin;
  s.total_iterations = trace.iterations();
  ChainTrace& c = s.chain;
  c.param_dim = trace.param_dim;
  c.seed = trace.seed;
  c.fingerprint = trace.fingerprint;
  c.degenerate_events = trace.degenerate_events;
  c.latent_iterations = trace.latent_iterations;
  c.latent_snapshots = trace.latent_snapshots;
  const std::size_t d = trace.param_dim;
  for (std::size_t n = thin - 1; n < trace.iterations(); n += thin) {
    s.iteration_index.push_back(n);
    c.theta.insert(c.theta.end(), trace.theta.begin() + n * d, trace.theta.begin() + (n + 1) * d);
    c.increment.insert(c.increment.end(), trace.increment.begin() + n * d,
                       trace.increment.begin() + (n + 1) * d);
    c.accepted.push_back(trace.accepted[n]);
    c.log_r.push_back(trace.log_r[n]);
  }
  // Burn-in counted in stored records.
  c.burn_in = 0;
  while (c.burn_in < s.iteration_index.size() && s.iteration_index[c.burn_in] < trace.burn_in) {
    ++c.burn_in;
  }
  return s;
}

void write_trace_binary(const std::string& path, const StoredTrace& s) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace '" + path + "'");
  const ChainTrace& c = s.chain;
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kTraceFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.param_dim));
  put<std::uint64_t>(out, c.iterations());
  put<std::uint64_t>(out, s.total_iterations);
  put<std::uint64_t>(out, c.burn_in);
  put<std::uint64_t>(out, s.thin);
  put<std::uint64_t>(out, c.seed);
  put<std::uint64_t>(out, c.degenerate_events);
  put<std::uint64_t>(out, c.fingerprint.size());
  out.write(c.fingerprint.data(), static_cast<std::streamsize>(c.fingerprint.size()));
  put_block(out, s.iteration_index);
  put_block(out, c.theta);
  put_block(out, c.accepted);
  put_block(out, c.log_r);
  put_block(out, c.increment);
  put<std::uint64_t>(out, c.latent_snapshots.size());
  for (std::size_t i = 0; i < c.latent_snapshots.size(); ++i) {
    const LatentPath& p = c.latent_snapshots[i];
    put<std::uint64_t>(out, c.latent_iterations[i]);
    put<std::uint64_t>(out, p.length());
    put<std::uint64_t>(out, p.state_dim());
    put_block(out, p.values());
  }
  if (!out) throw std::runtime_error("write failed for trace '" + path + "'");
}

StoredTrace read_trace_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read trace '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("'" + path + "' is not a trace file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kTraceFormatVersion) {
    throw std::runtime_error("unsupported trace format version " + std::to_string(version));
  }
  StoredTrace s;
  ChainTrace& c = s.chain;
  c.param_dim = get<std::uint32_t>(in);
  const auto records = get<std::uint64_t>(in);
  s.total_iterations = get<std::uint64_t>(in);
  c.burn_in = get<std::uint64_t>(in);
  s.thin = get<std::uint64_t>(in);
  c.seed = get<std::uint64_t>(in);
  c.degenerate_events = get<std::uint64_t>(in);
  const auto flen = get<std::uint64_t>(in);
  c.fingerprint.resize(flen);
  if (flen > 0 && !in.read(c.fingerprint.data(), static_cast<std::streamsize>(flen))) {
    throw std::runtime_error("truncated trace file");
  }
  s.iteration_index = get_block<std::uint64_t>(in, records);
  c.theta = get_block<double>(in, records * c.param_dim);
  c.accepted = get_block<std::uint8_t>(in, records);
  c.log_r = get_block<double>(in, records);
  c.increment = get_block<double>(in, records * c.param_dim);
  const auto snaps = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < snaps; ++i) {
    c.latent_iterations.push_back(get<std::uint64_t>(in));
    const auto len = get<std::uint64_t>(in);
    const auto dx = get<std::uint64_t>(in);
    c.latent_snapshots.emplace_back(get_block<double>(in, len * dx), dx);
  }
  return s;
}

void write_trace_csv(const std::string& path, const StoredTrace& s,
                     const std::vector<std::string>& param_names) {
  const ChainTrace& c = s.chain;
  if (param_names.size() != c.param_dim) throw std::invalid_argument("parameter name count");
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  std::vector<std::string> header{"iteration"};
  for (const auto& n : param_names) header.push_back(n);
  header.push_back("accepted");
  header.push_back("log_r");
  for (const auto& n : param_names) header.push_back("increment_" + n);
  write_record(out, header);
  const std::size_t d = c.param_dim;
  for (std::size_t r = 0; r < c.iterations(); ++r) {
    std::vector<std::string> row{std::to_string(s.iteration_index[r])};
    for (std::size_t i = 0; i < d; ++i) row.push_back(format_double(c.theta[r * d + i]));
    row.push_back(c.accepted[r] ? "1" : "0");
    row.push_back(format_double(c.log_r[r]));
    for (std::size_t i = 0; i < d; ++i) row.push_back(format_double(c.increment[r * d + i]));
    write_record(out, row);
  }
}

}  // namespace bridgemc::harness
