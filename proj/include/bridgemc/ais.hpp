#ifndef BRIDGEMC_AIS_HPP_
#define BRIDGEMC_AIS_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "bridgemc/model.hpp"
#include "bridgemc/smc.hpp"

namespace bridgemc {

enum class PathKind {
  // gamma_{theta,theta',s} = p_{(1-s) theta + s theta'}(x, y)
  parameter,
  // gamma_{theta,theta',s} = p_theta(x, y)^(1-s) p_theta'(x, y)^s; density evaluation only
  geometric,
};

// Bridge between p_theta(. | y) and p_theta'(. | y) through K intermediate
// distributions at levels schedule[k], k = 0..K+1, with schedule[0] = 0 and
// schedule[K+1] = 1.
class AnnealingPath {
 public:
  // Equispaced levels k / (K + 1).
  static AnnealingPath linear(ParamVector from, ParamVector to, std::size_t intermediate_steps,
                              PathKind kind = PathKind::parameter);
  // Explicit nondecreasing levels; throws DomainError on a malformed table.
  static AnnealingPath with_schedule(ParamVector from, ParamVector to,
                                     std::vector<double> schedule,
                                     PathKind kind = PathKind::parameter);

  std::size_t intermediate_steps() const { return schedule_.size() - 2; }
  double level(std::size_t k) const { return schedule_.at(k); }
  const std::vector<double>& schedule() const { return schedule_; }
  PathKind kind() const { return kind_; }
  const ParamVector& from() const { return from_; }
  const ParamVector& to() const { return to_; }

  // (1 - s_k) theta + s_k theta'; exact endpoints at k = 0 and k = K + 1.
  ParamVector stage_parameter(std::size_t k) const;

  // Throws DomainError if any stage parameter leaves the model's domain.
  void validate(const StateSpaceModel& model) const;

 private:
  AnnealingPath(ParamVector from, ParamVector to, std::vector<double> schedule, PathKind kind);

  ParamVector from_, to_;
  std::vector<double> schedule_;
  PathKind kind_;
};

// log gamma_{theta,theta',k}(x).
double intermediate_logdensity(const AnnealingPath& path, std::size_t k, const LatentPath& x,
                               const Dataset& data, const StateSpaceModel& model);

// cSMC settings of one annealing stage.
struct StageKernel {
  std::size_t particles = 100;
  bool backward_sampling = true;
  std::shared_ptr<const Proposal> proposal;  // null means bootstrap
};

struct RatioEstimate {
  double log_value = 0.0;
  // increments[k] = log gamma_{k+1}(u_k) - log gamma_k(u_k), k = 0..K.
  std::vector<double> increments;
  // u_0 .. u_K; the last entry is the returned path.
  std::vector<LatentPath> stage_paths;

  const LatentPath& final_path() const { return stage_paths.back(); }
};

// AIS with cSMC moves: u_0 = x0, u_k = cSMC at stage k started from u_{k-1},
// and log L-hat = sum of stage increments. If x0 ~ pi_theta, exp(log_value) is
// unbiased for l_theta'(y) / l_theta(y).
RatioEstimate ais_csmc_run(const LatentPath& x0, const AnnealingPath& path,
                           const StateSpaceModel& model, const Dataset& data,
                           const StageKernel& kernel, RngStream& rng);

// Per-stage kernels, one for each of the K intermediate stages.
RatioEstimate ais_csmc_run(const LatentPath& x0, const AnnealingPath& path,
                           const StateSpaceModel& model, const Dataset& data,
                           std::span<const StageKernel> kernels, RngStream& rng);

// Applies the stage-0 kernel (cSMC at theta) `sweeps` times.
LatentPath warm_start(const LatentPath& x, const StateSpaceModel& model, ParamSpan theta,
                      const Dataset& data, const StageKernel& kernel, std::size_t sweeps,
                      RngStream& rng);

struct VarianceRow {
  double distance = 0.0;
  double variance = 0.0;
  double std_error = 0.0;  // of the variance estimate
};

// Sample variance of log L-hat(theta, theta + delta) against |delta|. Each
// replicate starts from a fresh reference path at theta: an exact draw when
// the model is IidGaussianModel, otherwise SMC plus `warmup` cSMC sweeps.
std::vector<VarianceRow> ratio_variance_vs_distance(const StateSpaceModel& model,
                                                    const Dataset& data, ParamSpan theta,
                                                    std::span<const ParamVector> directions,
                                                    std::size_t intermediate_steps,
                                                    const StageKernel& kernel,
                                                    std::size_t replicates, RngStream& rng,
                                                    std::size_t warmup = 5);

// True when values increase along the grid up to one-sided noise at level z:
// values[j+1] >= values[j] - z * sqrt(se[j]^2 + se[j+1]^2) for every j.
bool increasing_within_noise(std::span<const double> values, std::span<const double> std_errors,
                             double z = 1.645);

}  // namespace bridgemc

#endif  // BRIDGEMC_AIS_HPP_
