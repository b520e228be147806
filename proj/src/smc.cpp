#include "bridgemc/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bridgemc/errors.hpp"
#include "bridgemc/models.hpp"

namespace bridgemc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double sanitize(double lw) { return std::isnan(lw) ? kNegInf : lw; }

double initial_logweight(const StateSpaceModel& model, const Proposal& proposal, ParamSpan theta,
                         const Dataset& data, std::span<const double> x) {
  double lw = model.obs_logdensity(theta, 0, x, data.obs(0));
  if (!proposal.is_prior()) {
    lw += model.init_logdensity(theta, x) - proposal.initial_logdensity(model, theta, data, x);
  }
  return sanitize(lw);
}

double next_logweight(const StateSpaceModel& model, const Proposal& proposal, ParamSpan theta,
                      const Dataset& data, std::size_t t, std::span<const double> prev,
                      std::span<const double> x) {
  double lw = model.obs_logdensity(theta, t, x, data.obs(t));
  if (!proposal.is_prior()) {
    lw += model.trans_logdensity(theta, t, prev, x) -
          proposal.next_logdensity(model, theta, data, t, prev, x);
  }
  return sanitize(lw);
}

void check_inputs(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                  std::size_t particles) {
  if (particles == 0) throw std::invalid_argument("particle count must be at least 1");
  require_in_domain(model, theta);
  if (data.length() == 0) throw DomainError("dataset is empty");
  if (data.obs_dim != model.obs_dim()) throw DomainError("dataset obs_dim does not match model");
}

}  // namespace

// ---------------------------------------------------------------------------
// Proposals

void BootstrapProposal::sample_initial(const StateSpaceModel& model, ParamSpan theta,
                                       const Dataset&, RngStream& rng,
                                       std::span<double> out) const {
  model.sample_init(theta, rng, out);
}

double BootstrapProposal::initial_logdensity(const StateSpaceModel& model, ParamSpan theta,
                                             const Dataset&, std::span<const double> x) const {
  return model.init_logdensity(theta, x);
}

void BootstrapProposal::sample_next(const StateSpaceModel& model, ParamSpan theta, const Dataset&,
                                    std::size_t t, std::span<const double> prev, RngStream& rng,
                                    std::span<double> out) const {
  model.sample_trans(theta, t, prev, rng, out);
}

double BootstrapProposal::next_logdensity(const StateSpaceModel& model, ParamSpan theta,
                                          const Dataset&, std::size_t t,
                                          std::span<const double> prev,
                                          std::span<const double> x) const {
  return model.trans_logdensity(theta, t, prev, x);
}

std::shared_ptr<const Proposal> bootstrap_proposal() {
  static const auto instance = std::make_shared<const BootstrapProposal>();
  return instance;
}

IidAdaptedProposal::IidAdaptedProposal(double inflation) : inflation_(inflation) {
  if (!(inflation > 0.0)) throw DomainError("IidAdaptedProposal: inflation must be positive");
  log_inflation_ = std::log(inflation);
  sd_factor_ = std::sqrt(inflation);
}

const IidGaussianModel& IidAdaptedProposal::iid(const StateSpaceModel& model) const {
  const auto* m = dynamic_cast<const IidGaussianModel*>(&model);
  if (m == nullptr) throw UnsupportedOperation("IidAdaptedProposal requires IidGaussianModel");
  return *m;
}

void IidAdaptedProposal::sample_initial(const StateSpaceModel& model, ParamSpan theta,
                                        const Dataset& data, RngStream& rng,
                                        std::span<double> out) const {
  sample_next(model, theta, data, 0, {}, rng, out);
}

double IidAdaptedProposal::initial_logdensity(const StateSpaceModel& model, ParamSpan theta,
                                              const Dataset& data,
                                              std::span<const double> x) const {
  return next_logdensity(model, theta, data, 0, {}, x);
}

void IidAdaptedProposal::sample_next(const StateSpaceModel& model, ParamSpan theta,
                                     const Dataset& data, std::size_t t, std::span<const double>,
                                     RngStream& rng, std::span<double> out) const {
  const IidGaussianModel& m = iid(model);
  const double mean = m.conditional(theta[0], data.obs(t)[0]).mean;
  out[0] = rng.normal(mean, sd_factor_ * std::sqrt(m.conditional_var()));
}

double IidAdaptedProposal::next_logdensity(const StateSpaceModel& model, ParamSpan theta,
                                           const Dataset& data, std::size_t t,
                                           std::span<const double>,
                                           std::span<const double> x) const {
  const IidGaussianModel& m = iid(model);
  const auto c = m.conditional(theta[0], data.obs(t)[0]);
  const double var = inflation_ * c.var;
  const double d = x[0] - c.mean;
  return -0.5 * (kLogTwoPi + log_inflation_ + m.log_conditional_var() + d * d / var);
}

// ---------------------------------------------------------------------------
// Particle storage and resampling

ParticleSystem::ParticleSystem(std::size_t length, std::size_t particles, std::size_t state_dim)
    : length_(length),
      n_(particles),
      dx_(state_dim),
      z_(length * particles * state_dim),
      a_(length > 0 ? (length - 1) * particles : 0),
      logw_(length * particles) {}

LatentPath ParticleSystem::trace_path(std::size_t index) const {
  LatentPath path(length_, dx_);
  std::size_t k = index;
  for (std::size_t t = length_; t-- > 0;) {
    std::ranges::copy(state(t, k), path.state(t).begin());
    if (t > 0) k = ancestor(t, k);
  }
  return path;
}

bool CategoricalSampler::reset(std::span<const double> log_weights) {
  cdf_.resize(log_weights.size());
  const double m = *std::ranges::max_element(log_weights);
  if (!(m > kNegInf)) return false;
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i] - m);
    cdf_[i] = acc;
  }
  return true;
}

std::size_t CategoricalSampler::draw(RngStream& rng) const {
  const double target = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  if (it == cdf_.end()) {
    // Rounding put target on the total; take the last index with positive mass.
    it = std::lower_bound(cdf_.begin(), cdf_.end(), cdf_.back());
  }
  return static_cast<std::size_t>(it - cdf_.begin());
}

std::vector<double> CategoricalSampler::probabilities() const {
  std::vector<double> p(cdf_.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < cdf_.size(); ++i) {
    p[i] = (cdf_[i] - prev) / cdf_.back();
    prev = cdf_[i];
  }
  return p;
}

double log_mean_exp(std::span<const double> values) {
  const double m = *std::ranges::max_element(values);
  if (!(m > kNegInf)) return kNegInf;
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s / static_cast<double>(values.size()));
}

// ---------------------------------------------------------------------------
// SMC

ParticleSystem smc_run(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                       const Proposal& proposal, std::size_t particles, RngStream& rng) {
  check_inputs(model, theta, data, particles);
  const std::size_t T = data.length();
  ParticleSystem ps(T, particles, model.state_dim());

  for (std::size_t i = 0; i < particles; ++i) {
    proposal.sample_initial(model, theta, data, rng, ps.state(0, i));
    ps.log_weight(0, i) = initial_logweight(model, proposal, theta, data, ps.state(0, i));
  }

  CategoricalSampler cat;
  for (std::size_t t = 1; t < T; ++t) {
    if (!cat.reset(ps.log_weights(t - 1))) throw DegenerateWeightsError(t - 1);
    for (std::size_t i = 0; i < particles; ++i) {
      const std::size_t a = cat.draw(rng);
      ps.ancestor(t, i) = a;
      proposal.sample_next(model, theta, data, t, ps.state(t - 1, a), rng, ps.state(t, i));
      ps.log_weight(t, i) =
          next_logweight(model, proposal, theta, data, t, ps.state(t - 1, a), ps.state(t, i));
    }
  }
  if (!cat.reset(ps.log_weights(T - 1))) throw DegenerateWeightsError(T - 1);
  return ps;
}

LogLikeEstimate log_likelihood_estimate(const ParticleSystem& ps) {
  LogLikeEstimate est;
  est.particles = ps.particles();
  est.length = ps.length();
  for (std::size_t t = 0; t < ps.length(); ++t) {
    const double v = log_mean_exp(ps.log_weights(t));
    if (!(v > kNegInf)) {
      est.value = kNegInf;
      est.degenerate = true;
      return est;
    }
    est.value += v;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Conditional SMC

CsmcResult csmc_run_detailed(bool backward_sampling, const StateSpaceModel& model,
                             ParamSpan theta, const Dataset& data, const Proposal& proposal,
                             std::size_t particles, const LatentPath& reference, RngStream& rng) {
  check_inputs(model, theta, data, particles);
  const std::size_t T = data.length();
  if (reference.length() != T || reference.state_dim() != model.state_dim()) {
    throw std::invalid_argument("csmc_run: reference path does not match the dataset");
  }
  if (backward_sampling && !model.has_transition_density()) {
    throw UnsupportedOperation("backward sampling needs a pointwise transition density");
  }

  CsmcResult out;
  ParticleSystem& ps = out.particles;
  ps = ParticleSystem(T, particles, model.state_dim());

  for (std::size_t t = 0; t < T; ++t) std::ranges::copy(reference.state(t), ps.state(t, 0).begin());

  ps.log_weight(0, 0) = initial_logweight(model, proposal, theta, data, ps.state(0, 0));
  for (std::size_t i = 1; i < particles; ++i) {
    proposal.sample_initial(model, theta, data, rng, ps.state(0, i));
    ps.log_weight(0, i) = initial_logweight(model, proposal, theta, data, ps.state(0, i));
  }

  CategoricalSampler cat;
  for (std::size_t t = 1; t < T; ++t) {
    if (!cat.reset(ps.log_weights(t - 1))) throw DegenerateWeightsError(t - 1);
    ps.ancestor(t, 0) = 0;
    ps.log_weight(t, 0) =
        next_logweight(model, proposal, theta, data, t, ps.state(t - 1, 0), ps.state(t, 0));
    for (std::size_t i = 1; i < particles; ++i) {
      const std::size_t a = cat.draw(rng);
      ps.ancestor(t, i) = a;
      proposal.sample_next(model, theta, data, t, ps.state(t - 1, a), rng, ps.state(t, i));
      ps.log_weight(t, i) =
          next_logweight(model, proposal, theta, data, t, ps.state(t - 1, a), ps.state(t, i));
    }
  }

  out.indices.assign(T, 0);
  out.path = LatentPath(T, model.state_dim());
  if (!cat.reset(ps.log_weights(T - 1))) throw DegenerateWeightsError(T - 1);
  std::size_t k = cat.draw(rng);
  out.indices[T - 1] = k;
  std::ranges::copy(ps.state(T - 1, k), out.path.state(T - 1).begin());

  const bool transition_free = model.transition_ignores_previous();
  std::vector<double> backward(particles);
  for (std::size_t t = T - 1; t-- > 0;) {
    if (!backward_sampling) {
      k = ps.ancestor(t + 1, k);
    } else {
      // With f_theta(x, x') free of x the factor is common to all particles.
      if (transition_free) {
        std::ranges::copy(ps.log_weights(t), backward.begin());
      } else {
        model.trans_logdensities(theta, t + 1, ps.states(t), out.path.state(t + 1), backward);
        for (std::size_t i = 0; i < particles; ++i) {
          backward[i] = sanitize(backward[i] + ps.log_weight(t, i));
        }
      }
      if (!cat.reset(backward)) throw DegenerateWeightsError(t);
      k = cat.draw(rng);
    }
    out.indices[t] = k;
    std::ranges::copy(ps.state(t, k), out.path.state(t).begin());
  }
  return out;
}

LatentPath csmc_run(bool backward_sampling, const StateSpaceModel& model, ParamSpan theta,
                    const Dataset& data, const Proposal& proposal, std::size_t particles,
                    const LatentPath& reference, RngStream& rng) {
  return csmc_run_detailed(backward_sampling, model, theta, data, proposal, particles, reference,
                           rng)
      .path;
}

LatentPath draw_reference_path(const StateSpaceModel& model, ParamSpan theta, const Dataset& data,
                               const Proposal& proposal, std::size_t particles,
                               std::size_t sweeps, RngStream& rng) {
  const ParticleSystem ps = smc_run(model, theta, data, proposal, particles, rng);
  CategoricalSampler cat;
  cat.reset(ps.log_weights(ps.length() - 1));
  LatentPath path = ps.trace_path(cat.draw(rng));
  for (std::size_t s = 0; s < sweeps; ++s) {
    path = csmc_run(model.has_transition_density(), model, theta, data, proposal, particles, path,
                    rng);
  }
  return path;
}

}  // namespace bridgemc
