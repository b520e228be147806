#include "bridgemc/ais.hpp"

#include <algorithm>
#include <cmath>

#include "bridgemc/errors.hpp"
#include "bridgemc/models.hpp"

namespace bridgemc {

AnnealingPath::AnnealingPath(ParamVector from, ParamVector to, std::vector<double> schedule,
                             PathKind kind)
    : from_(std::move(from)), to_(std::move(to)), schedule_(std::move(schedule)), kind_(kind) {
  if (from_.size() != to_.size()) throw DomainError("annealing endpoints differ in dimension");
  if (schedule_.size() < 2 || schedule_.front() != 0.0 || schedule_.back() != 1.0) {
    throw DomainError("annealing schedule must start at 0 and end at 1");
  }
  for (std::size_t k = 1; k < schedule_.size(); ++k) {
    if (!(schedule_[k] >= schedule_[k - 1])) {
      throw DomainError("annealing schedule must be nondecreasing");
    }
  }
}

AnnealingPath AnnealingPath::linear(ParamVector from, ParamVector to,
                                    std::size_t intermediate_steps, PathKind kind) {
  std::vector<double> s(intermediate_steps + 2);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s[k] = static_cast<double>(k) / static_cast<double>(intermediate_steps + 1);
  }
  return AnnealingPath(std::move(from), std::move(to), std::move(s), kind);
}

AnnealingPath AnnealingPath::with_schedule(ParamVector from, ParamVector to,
                                           std::vector<double> schedule, PathKind kind) {
  return AnnealingPath(std::move(from), std::move(to), std::move(schedule), kind);
}

ParamVector AnnealingPath::stage_parameter(std::size_t k) const {
  if (k == 0) return from_;
  if (k + 1 == schedule_.size()) return to_;
  const double s = schedule_.at(k);
  ParamVector p(from_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = from_[i] + s * (to_[i] - from_[i]);
  return p;
}

void AnnealingPath::validate(const StateSpaceModel& model) const {
  require_in_domain(model, from_);
  require_in_domain(model, to_);
  if (kind_ == PathKind::parameter) {
    for (std::size_t k = 1; k + 1 < schedule_.size(); ++k) require_in_domain(model, stage_parameter(k));
  }
}

double intermediate_logdensity(const AnnealingPath& path, std::size_t k, const LatentPath& x,
                               const Dataset& data, const StateSpaceModel& model) {
  if (k + 1 > path.schedule().size()) throw std::out_of_range("annealing stage index");
  if (path.kind() == PathKind::parameter) {
    return joint_logdensity(model, path.stage_parameter(k), x, data);
  }
  const double s = path.level(k);
  if (s == 0.0) return joint_logdensity(model, path.from(), x, data);
  if (s == 1.0) return joint_logdensity(model, path.to(), x, data);
  return (1.0 - s) * joint_logdensity(model, path.from(), x, data) +
         s * joint_logdensity(model, path.to(), x, data);
}

RatioEstimate ais_csmc_run(const LatentPath& x0, const AnnealingPath& path,
                           const StateSpaceModel& model, const Dataset& data,
                           std::span<const StageKernel> kernels, RngStream& rng) {
  const std::size_t K = path.intermediate_steps();
  if (kernels.size() != K) throw std::invalid_argument("need one stage kernel per intermediate step");
  if (x0.length() != data.length()) throw std::invalid_argument("initial path length differs from T");
  if (path.kind() == PathKind::geometric && K > 0) {
    throw UnsupportedOperation(
        "geometric annealing has no tractable cSMC kernel; use the parameter path");
  }
  path.validate(model);

  RatioEstimate est;
  est.stage_paths.reserve(K + 1);
  est.stage_paths.push_back(x0);
  for (std::size_t k = 1; k <= K; ++k) {
    const StageKernel& kern = kernels[k - 1];
    const Proposal& prop = kern.proposal ? *kern.proposal : *bootstrap_proposal();
    est.stage_paths.push_back(csmc_run(kern.backward_sampling, model, path.stage_parameter(k), data,
                                       prop, kern.particles, est.stage_paths.back(), rng));
  }
  est.increments.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const LatentPath& u = est.stage_paths[k];
    est.increments[k] = intermediate_logdensity(path, k + 1, u, data, model) -
                        intermediate_logdensity(path, k, u, data, model);
    est.log_value += est.increments[k];
  }
  return est;
}

RatioEstimate ais_csmc_run(const LatentPath& x0, const AnnealingPath& path,
                           const StateSpaceModel& model, const Dataset& data,
                           const StageKernel& kernel, RngStream& rng) {
  const std::vector<StageKernel> kernels(path.intermediate_steps(), kernel);
  return ais_csmc_run(x0, path, model, data, kernels, rng);
}

LatentPath warm_start(const LatentPath& x, const StateSpaceModel& model, ParamSpan theta,
                      const Dataset& data, const StageKernel& kernel, std::size_t sweeps,
                      RngStream& rng) {
  const Proposal& prop = kernel.proposal ? *kernel.proposal : *bootstrap_proposal();
  LatentPath u = x;
  for (std::size_t s = 0; s < sweeps; ++s) {
    u = csmc_run(kernel.backward_sampling, model, theta, data, prop, kernel.particles, u, rng);
  }
  return u;
}

std::vector<VarianceRow> ratio_variance_vs_distance(const StateSpaceModel& model,
                                                    const Dataset& data, ParamSpan theta,
                                                    std::span<const ParamVector> directions,
                                                    std::size_t intermediate_steps,
                                                    const StageKernel& kernel,
                                                    std::size_t replicates, RngStream& rng,
                                                    std::size_t warmup) {
  if (replicates < 2) throw std::invalid_argument("need at least two replicates");
  const auto* iid = dynamic_cast<const IidGaussianModel*>(&model);
  const Proposal& prop = kernel.proposal ? *kernel.proposal : *bootstrap_proposal();
  const ParamVector from(theta.begin(), theta.end());

  std::vector<VarianceRow> rows;
  for (std::size_t j = 0; j < directions.size(); ++j) {
    const ParamVector& delta = directions[j];
    ParamVector to = from;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < to.size(); ++i) {
      to[i] += delta[i];
      norm2 += delta[i] * delta[i];
    }
    const AnnealingPath path = AnnealingPath::linear(from, to, intermediate_steps);
    RngStream cell = rng.derive(j);
    std::vector<double> v(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
      RngStream rep = cell.derive(r);
      const LatentPath x0 =
          iid != nullptr ? iid->sample_conditional_path(from[0], data, rep)
                         : draw_reference_path(model, from, data, prop, kernel.particles, warmup, rep);
      v[r] = ais_csmc_run(x0, path, model, data, kernel, rep).log_value;
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(replicates);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
      const double d2 = (x - mean) * (x - mean);
      m2 += d2;
      m4 += d2 * d2;
    }
    const double n = static_cast<double>(replicates);
    const double var = m2 / (n - 1.0);
    const double se = std::sqrt(std::max(0.0, m4 / n - (m2 / n) * (m2 / n)) / n);
    rows.push_back({std::sqrt(norm2), var, se});
  }
  return rows;
}

bool increasing_within_noise(std::span<const double> values, std::span<const double> std_errors,
                             double z) {
  for (std::size_t j = 0; j + 1 < values.size(); ++j) {
    const double tol = z * std::hypot(std_errors[j], std_errors[j + 1]);
    if (values[j + 1] < values[j] - tol) return false;
  }
  return true;
}

}  // namespace bridgemc
