#ifndef BRIDGEMC_SAMPLERS_HPP_
#define BRIDGEMC_SAMPLERS_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgemc/ais.hpp"
#include "bridgemc/model.hpp"
#include "bridgemc/smc.hpp"

namespace bridgemc {

// Coordinates on which the random walk moves.
enum class RwScale {
  identity,
  // Walk on sqrt(theta_i); used for variance parameters proposed on the
  // standard-deviation scale. A nonpositive square root is out of support.
  sqrt,
};

// Gaussian random-walk proposal with per-coordinate standard deviations.
class RwProposal {
 public:
  RwProposal() = default;
  RwProposal(std::vector<double> sd, RwScale scale = RwScale::identity);

  // sd_i = base_sd_i / sqrt(T).
  static RwProposal scaled_by_length(std::vector<double> base_sd, std::size_t length,
                                     RwScale scale = RwScale::identity);

  struct Draw {
    ParamVector theta;      // proposed value (meaningful only when in_support)
    ParamVector increment;  // step in the walk coordinates
    bool in_support = true;
  };

  Draw propose(ParamSpan theta, RngStream& rng) const;

  // log q(theta', theta) - log q(theta, theta'); zero for the identity scale.
  double log_hastings(ParamSpan theta, ParamSpan proposed) const;

  const std::vector<double>& sd() const { return sd_; }
  RwScale scale() const { return scale_; }

 private:
  std::vector<double> sd_;
  RwScale scale_ = RwScale::identity;
};

struct ChainState {
  ParamVector theta;
  std::optional<LatentPath> latent;      // MCMC-AIS and MwPG
  std::optional<double> cached_loglike;  // PMMH
  std::uint64_t iteration = 0;
};

// Two streams per chain: the proposal stream drives theta increments and
// acceptance uniforms, the kernel stream drives every SMC/cSMC call. Paired
// runs share the proposal stream.
struct ChainRngs {
  RngStream proposal;
  RngStream kernel;
  std::uint64_t seed = 0;  // recorded in traces

  static ChainRngs from_seed(std::uint64_t seed);
};

// A failure inside run_chain, tagged with the iteration at which it occurred.
class ChainError : public std::runtime_error {
 public:
  ChainError(std::uint64_t iteration, const std::string& what)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::uint64_t iteration_;
};

struct StepOutcome {
  bool accepted = false;
  double log_r = 0.0;
  ParamVector proposed;
  ParamVector increment;
  // log q(theta',theta)/q(theta,theta') + log eta(theta') - log eta(theta)
  double log_prior_proposal = 0.0;
  // MCMC-AIS / MwPG: stage increments of the ratio estimator
  std::vector<double> stage_increments;
  bool degenerate = false;  // PMMH: the SMC at theta' collapsed
};

struct SmcConfig {
  std::size_t particles = 100;
  std::shared_ptr<const Proposal> proposal;  // null means bootstrap
};

struct BridgeConfig {
  std::size_t intermediate_steps = 1;
  std::vector<double> schedule;  // empty means k / (K + 1)
  std::size_t particles = 100;
  bool backward_sampling = true;
  std::shared_ptr<const Proposal> proposal;

  AnnealingPath make_path(ParamVector from, ParamVector to) const;
  StageKernel kernel() const { return {particles, backward_sampling, proposal}; }
};

struct CsmcConfig {
  std::size_t particles = 100;
  bool backward_sampling = true;
  std::shared_ptr<const Proposal> proposal;
};

// Random-walk MH on theta with the exact likelihood. Requires
// model.exact_likelihood().
StepOutcome marginal_mh_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                             const RwProposal& rw, ChainRngs& rngs);

// Particle marginal MH. The cached estimate is never refreshed; it changes
// only on acceptance.
StepOutcome pmmh_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                      const RwProposal& rw, const SmcConfig& smc, ChainRngs& rngs);

// MH on (theta, x_{1:T}) with the AIS-cSMC ratio estimate in place of the
// likelihood ratio. Requires K >= 1.
StepOutcome mcmc_ais_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                          const RwProposal& rw, const BridgeConfig& bridge, ChainRngs& rngs);

// Metropolis-within-particle-Gibbs: theta | x by MH (the K = 0 bridge), then
// x | theta by one cSMC sweep. The outcome describes the theta update.
StepOutcome mwpg_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                      const RwProposal& rw, const CsmcConfig& csmc, ChainRngs& rngs);

enum class SamplerKind { marginal_mh, pmmh, mcmc_ais, mwpg };

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::mcmc_ais;
  RwProposal rw;
  std::size_t particles = 100;
  std::shared_ptr<const Proposal> proposal;
  std::size_t intermediate_steps = 1;  // MCMC-AIS only
  std::vector<double> schedule;        // MCMC-AIS only
  bool backward_sampling = true;       // MCMC-AIS and MwPG

  // Stable text summary of every setting, recorded in traces.
  std::string fingerprint() const;
};

StepOutcome sampler_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                         const SamplerConfig& config, ChainRngs& rngs);

// Initial state: theta from the prior (or given), latent from one SMC draw,
// cached likelihood for PMMH.
ChainState initial_state(const StateSpaceModel& model, const Dataset& data,
                         const SamplerConfig& config, ChainRngs& rngs,
                         std::optional<ParamVector> theta = std::nullopt);

struct ChainTrace {
  std::size_t param_dim = 0;
  std::size_t burn_in = 0;
  std::vector<double> theta;       // iterations x param_dim, state after each iteration
  std::vector<std::uint8_t> accepted;
  std::vector<double> log_r;
  std::vector<double> increment;   // iterations x param_dim
  std::vector<std::uint64_t> latent_iterations;
  std::vector<LatentPath> latent_snapshots;
  std::size_t degenerate_events = 0;
  std::uint64_t seed = 0;
  std::string fingerprint;

  std::size_t iterations() const { return accepted.size(); }
  // Post-burn-in series of coordinate i.
  std::vector<double> coordinate(std::size_t i, bool after_burn_in = true) const;
  double acceptance_rate(bool after_burn_in = true) const;
};

struct RunOptions {
  std::size_t iterations = 1000;
  std::size_t burn_in = 100;
  std::size_t latent_every = 0;  // 0 keeps no latent snapshots
};

// Iterates sampler_step; errors are rethrown with the iteration index.
ChainTrace run_chain(const StateSpaceModel& model, const Dataset& data,
                     const SamplerConfig& config, const RunOptions& options, ChainState state,
                     ChainRngs rngs);

struct SpsaEstimate {
  ParamVector gradient;
  ParamVector std_error;
  std::vector<double> log_ratios;  // one per replicate
};

// Simultaneous-perturbation gradient of log l_theta: component i averages
// log L-hat(theta - delta, theta + delta) / (2 delta_i) over replicates, each
// started from a path warmed by `warmup` cSMC sweeps at theta - delta.
SpsaEstimate spsa_gradient_estimate(const StateSpaceModel& model, const Dataset& data,
                                    ParamSpan theta, ParamSpan delta, const BridgeConfig& bridge,
                                    std::size_t replicates, RngStream& rng,
                                    std::size_t warmup = 5);

// Central difference of the exact log-likelihood along delta.
ParamVector spsa_exact_gradient(const StateSpaceModel& model, const Dataset& data,
                                ParamSpan theta, ParamSpan delta);

}  // namespace bridgemc

#endif  // BRIDGEMC_SAMPLERS_HPP_
