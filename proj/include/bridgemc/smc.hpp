#ifndef BRIDGEMC_SMC_HPP_
#define BRIDGEMC_SMC_HPP_

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "bridgemc/model.hpp"

namespace bridgemc {

class IidGaussianModel;

// Instrumental distributions {m_theta, M_theta} used to propagate particles.
class Proposal {
 public:
  virtual ~Proposal() = default;

  // True for the bootstrap choice M_theta = f_theta, in which case the
  // incremental weight reduces to g_theta and the proposal densities are
  // never evaluated.
  virtual bool is_prior() const { return false; }

  virtual void sample_initial(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                              RngStream& rng, std::span<double> out) const = 0;
  virtual double initial_logdensity(const StateSpaceModel& model, ParamSpan theta,
                                    const Dataset& data, std::span<const double> x) const = 0;
  virtual void sample_next(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                           std::size_t t, std::span<const double> prev, RngStream& rng,
                           std::span<double> out) const = 0;
  virtual double next_logdensity(const StateSpaceModel& model, ParamSpan theta,
                                 const Dataset& data, std::size_t t, std::span<const double> prev,
                                 std::span<const double> x) const = 0;
};

class BootstrapProposal final : public Proposal {
 public:
  bool is_prior() const override { return true; }
  void sample_initial(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                      RngStream& rng, std::span<double> out) const override;
  double initial_logdensity(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                            std::span<const double> x) const override;
  void sample_next(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                   std::size_t t, std::span<const double> prev, RngStream& rng,
                   std::span<double> out) const override;
  double next_logdensity(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                         std::size_t t, std::span<const double> prev,
                         std::span<const double> x) const override;
};

// For IidGaussianModel: draws x_t from N(m, inflation * v) where N(m, v) is the
// exact conditional p_theta(x_t | y_t). inflation = 1 gives constant weights.
class IidAdaptedProposal final : public Proposal {
 public:
  explicit IidAdaptedProposal(double inflation);
  void sample_initial(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                      RngStream& rng, std::span<double> out) const override;
  double initial_logdensity(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                            std::span<const double> x) const override;
  void sample_next(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                   std::size_t t, std::span<const double> prev, RngStream& rng,
                   std::span<double> out) const override;
  double next_logdensity(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                         std::size_t t, std::span<const double> prev,
                         std::span<const double> x) const override;

  double inflation() const { return inflation_; }

 private:
  const IidGaussianModel& iid(const StateSpaceModel& model) const;
  double inflation_, log_inflation_, sd_factor_;
};

std::shared_ptr<const Proposal> bootstrap_proposal();

// Particles z, ancestors a and unnormalized log-weights over T time steps.
// Ancestor indices are zero-based; ancestor(t, i) names the parent at t - 1
// of particle i at time t, for t >= 1.
class ParticleSystem {
 public:
  ParticleSystem() = default;
  ParticleSystem(std::size_t length, std::size_t particles, std::size_t state_dim);

  std::size_t length() const { return length_; }
  std::size_t particles() const { return n_; }
  std::size_t state_dim() const { return dx_; }

  std::span<const double> state(std::size_t t, std::size_t i) const {
    return {z_.data() + (t * n_ + i) * dx_, dx_};
  }
  std::span<double> state(std::size_t t, std::size_t i) {
    return {z_.data() + (t * n_ + i) * dx_, dx_};
  }
  // All particle states at time t, packed.
  std::span<const double> states(std::size_t t) const {
    return {z_.data() + t * n_ * dx_, n_ * dx_};
  }
  std::size_t ancestor(std::size_t t, std::size_t i) const { return a_[(t - 1) * n_ + i]; }
  std::size_t& ancestor(std::size_t t, std::size_t i) { return a_[(t - 1) * n_ + i]; }
  double log_weight(std::size_t t, std::size_t i) const { return logw_[t * n_ + i]; }
  double& log_weight(std::size_t t, std::size_t i) { return logw_[t * n_ + i]; }
  std::span<const double> log_weights(std::size_t t) const { return {logw_.data() + t * n_, n_}; }

  // Follows ancestors back from particle `index` at the final time.
  LatentPath trace_path(std::size_t index) const;

 private:
  std::size_t length_ = 0, n_ = 0, dx_ = 1;
  std::vector<double> z_;
  std::vector<std::size_t> a_;
  std::vector<double> logw_;
};

// Draws from P(w^{(1)}, ..., w^{(N)}) by inverse CDF over max-shifted weights,
// one uniform per draw; ties go to the lowest index.
class CategoricalSampler {
 public:
  // Returns false when every weight is zero.
  bool reset(std::span<const double> log_weights);
  std::size_t draw(RngStream& rng) const;
  // Normalized probabilities of the last reset.
  std::vector<double> probabilities() const;

 private:
  std::vector<double> cdf_;
};

// log(1/N sum_i exp(v_i)), stable for large magnitudes.
double log_mean_exp(std::span<const double> values);

struct LogLikeEstimate {
  double value = 0.0;
  std::size_t particles = 0;
  std::size_t length = 0;
  bool degenerate = false;
};

// Sequential Monte Carlo with multinomial resampling at every step.
// Throws DegenerateWeightsError if all weights vanish at some step.
ParticleSystem smc_run(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                       const Proposal& proposal, std::size_t particles, RngStream& rng);

// Sum over t of log-mean-exp of the weights: log of the unbiased likelihood
// estimate. A degenerate step yields -inf with the flag set.
LogLikeEstimate log_likelihood_estimate(const ParticleSystem& ps);

struct CsmcResult {
  LatentPath path;
  ParticleSystem particles;
  std::vector<std::size_t> indices;  // k_t selected at each time
};

// Conditional SMC with particle 0 pinned to `reference`; backward sampling
// re-draws the ancestry with weights w_t^{(i)} f_theta(z_t^{(i)}, x'_{t+1}).
CsmcResult csmc_run_detailed(bool backward_sampling, const StateSpaceModel& model,
                             ParamSpan theta, const Dataset& data, const Proposal& proposal,
                             std::size_t particles, const LatentPath& reference, RngStream& rng);

LatentPath csmc_run(bool backward_sampling, const StateSpaceModel& model, ParamSpan theta,
                    const Dataset& data, const Proposal& proposal, std::size_t particles,
                    const LatentPath& reference, RngStream& rng);

// A path drawn from the SMC approximation of p_theta(x_{1:T} | y_{1:T}),
// followed by `sweeps` cSMC-BS iterations.
LatentPath draw_reference_path(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                               const Proposal& proposal, std::size_t particles,
                               std::size_t sweeps, RngStream& rng);

}  // namespace bridgemc

#endif  // BRIDGEMC_SMC_HPP_
