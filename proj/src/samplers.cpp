#include "bridgemc/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "bridgemc/errors.hpp"

namespace bridgemc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const Proposal& resolve(const std::shared_ptr<const Proposal>& p) {
  return p ? *p : *bootstrap_proposal();
}

// Shared MH scaffolding: every sampler consumes d normals and one uniform from
// the proposal stream per iteration, in that order, whatever happens next.
struct Proposed {
  RwProposal::Draw draw;
  double log_u = 0.0;
  bool valid = false;
  double log_prior_proposal = kNegInf;
};

Proposed propose_theta(const ChainState& state, const StateSpaceModel& model,
                       const RwProposal& rw, RngStream& rng) {
  Proposed p;
  p.draw = rw.propose(state.theta, rng);
  p.log_u = std::log(rng.uniform());
  p.valid = p.draw.in_support && model.param_domain().contains(p.draw.theta);
  if (p.valid) {
    const double lp = model.prior_logdensity(p.draw.theta);
    p.valid = lp > kNegInf;
    if (p.valid) {
      p.log_prior_proposal =
          rw.log_hastings(state.theta, p.draw.theta) + lp - model.prior_logdensity(state.theta);
    }
  }
  return p;
}

StepOutcome make_outcome(const Proposed& p, double log_r) {
  StepOutcome out;
  out.proposed = p.draw.theta;
  out.increment = p.draw.increment;
  out.log_prior_proposal = p.log_prior_proposal;
  out.log_r = std::isnan(log_r) ? kNegInf : log_r;
  out.accepted = p.log_u < out.log_r;
  return out;
}

void check_rw(const RwProposal& rw, const StateSpaceModel& model) {
  if (rw.sd().size() != model.param_dim()) {
    throw std::invalid_argument("random-walk dimension differs from the model's parameter dimension");
  }
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os << std::setprecision(17) << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

std::string proposal_name(const std::shared_ptr<const Proposal>& p) {
  if (!p || p->is_prior()) return "bootstrap";
  if (const auto* a = dynamic_cast<const IidAdaptedProposal*>(p.get())) {
    std::ostringstream os;
    os << std::setprecision(17) << "iid_adapted(" << a->inflation() << ')';
    return os.str();
  }
  return "custom";
}

}  // namespace

RwProposal::RwProposal(std::vector<double> sd, RwScale scale) : sd_(std::move(sd)), scale_(scale) {
  if (sd_.empty()) throw DomainError("random-walk proposal needs at least one coordinate");
  for (double s : sd_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("random-walk sds must be positive");
  }
}

RwProposal RwProposal::scaled_by_length(std::vector<double> base_sd, std::size_t length,
                                        RwScale scale) {
  if (length == 0) throw DomainError("length must be positive");
  for (double& s : base_sd) s /= std::sqrt(static_cast<double>(length));
  return RwProposal(std::move(base_sd), scale);
}

RwProposal::Draw RwProposal::propose(ParamSpan theta, RngStream& rng) const {
  Draw d;
  d.theta.resize(sd_.size());
  d.increment.resize(sd_.size());
  for (std::size_t i = 0; i < sd_.size(); ++i) d.increment[i] = sd_[i] * rng.normal();
  for (std::size_t i = 0; i < sd_.size(); ++i) {
    if (scale_ == RwScale::identity) {
      d.theta[i] = theta[i] + d.increment[i];
    } else {
      const double s = std::sqrt(theta[i]) + d.increment[i];
      if (!(s > 0.0)) d.in_support = false;
      d.theta[i] = s * s;
    }
  }
  return d;
}

double RwProposal::log_hastings(ParamSpan theta, ParamSpan proposed) const {
  if (scale_ == RwScale::identity) return 0.0;
  double h = 0.0;
  for (std::size_t i = 0; i < sd_.size(); ++i) h += 0.5 * (std::log(proposed[i]) - std::log(theta[i]));
  return h;
}

ChainRngs ChainRngs::from_seed(std::uint64_t seed) {
  const RngStream root(seed);
  return {root.derive(label_key("proposal")), root.derive(label_key("kernel")), seed};
}

AnnealingPath BridgeConfig::make_path(ParamVector from, ParamVector to) const {
  if (schedule.empty()) return AnnealingPath::linear(std::move(from), std::move(to), intermediate_steps);
  if (schedule.size() != intermediate_steps + 2) {
    throw DomainError("schedule must have K + 2 levels");
  }
  return AnnealingPath::with_schedule(std::move(from), std::move(to), schedule);
}

StepOutcome marginal_mh_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                             const RwProposal& rw, ChainRngs& rngs) {
  const ExactLikelihood* exact = model.exact_likelihood();
  if (exact == nullptr) throw UnsupportedOperation("marginal MH needs an exact likelihood");
  check_rw(rw, model);
  const Proposed p = propose_theta(state, model, rw, rngs.proposal);
  double log_r = kNegInf;
  if (p.valid) {
    log_r = p.log_prior_proposal + exact->log_likelihood(p.draw.theta, data) -
            exact->log_likelihood(state.theta, data);
  }
  StepOutcome out = make_outcome(p, log_r);
  if (out.accepted) state.theta = p.draw.theta;
  ++state.iteration;
  return out;
}

StepOutcome pmmh_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                      const RwProposal& rw, const SmcConfig& smc, ChainRngs& rngs) {
  if (!state.cached_loglike) throw std::invalid_argument("PMMH state has no cached likelihood");
  check_rw(rw, model);
  const Proposed p = propose_theta(state, model, rw, rngs.proposal);
  double log_r = kNegInf;
  double ll = kNegInf;
  bool degenerate = false;
  if (p.valid) {
    try {
      const ParticleSystem ps =
          smc_run(model, p.draw.theta, data, resolve(smc.proposal), smc.particles, rngs.kernel);
      ll = log_likelihood_estimate(ps).value;
    } catch (const DegenerateWeightsError&) {
      degenerate = true;
    }
    log_r = p.log_prior_proposal + ll - *state.cached_loglike;
  }
  StepOutcome out = make_outcome(p, log_r);
  out.degenerate = degenerate;
  if (out.accepted) {
    state.theta = p.draw.theta;
    state.cached_loglike = ll;
  }
  ++state.iteration;
  return out;
}

StepOutcome mcmc_ais_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                          const RwProposal& rw, const BridgeConfig& bridge, ChainRngs& rngs) {
  if (bridge.intermediate_steps == 0) {
    throw std::invalid_argument("MCMC-AIS needs K >= 1; K = 0 gives a reducible chain");
  }
  if (!state.latent) throw std::invalid_argument("MCMC-AIS state has no latent path");
  check_rw(rw, model);
  const Proposed p = propose_theta(state, model, rw, rngs.proposal);
  double log_r = kNegInf;
  std::optional<RatioEstimate> est;
  if (p.valid) {
    const AnnealingPath path = bridge.make_path(state.theta, p.draw.theta);
    est = ais_csmc_run(*state.latent, path, model, data, bridge.kernel(), rngs.kernel);
    log_r = p.log_prior_proposal + est->log_value;
  }
  StepOutcome out = make_outcome(p, log_r);
  if (est) out.stage_increments = est->increments;
  if (out.accepted) {
    state.theta = p.draw.theta;
    state.latent = est->final_path();
  }
  ++state.iteration;
  return out;
}

StepOutcome mwpg_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                      const RwProposal& rw, const CsmcConfig& csmc, ChainRngs& rngs) {
  if (!state.latent) throw std::invalid_argument("MwPG state has no latent path");
  check_rw(rw, model);
  const Proposed p = propose_theta(state, model, rw, rngs.proposal);
  double log_r = kNegInf;
  double increment = 0.0;
  if (p.valid) {
    increment = joint_logdensity(model, p.draw.theta, *state.latent, data) -
                joint_logdensity(model, state.theta, *state.latent, data);
    log_r = p.log_prior_proposal + increment;
  }
  StepOutcome out = make_outcome(p, log_r);
  if (p.valid) out.stage_increments = {increment};
  if (out.accepted) state.theta = p.draw.theta;
  state.latent = csmc_run(csmc.backward_sampling, model, state.theta, data, resolve(csmc.proposal),
                          csmc.particles, *state.latent, rngs.kernel);
  ++state.iteration;
  return out;
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::marginal_mh: return "marginal_mh";
    case SamplerKind::pmmh: return "pmmh";
    case SamplerKind::mcmc_ais: return "mcmc_ais";
    case SamplerKind::mwpg: return "mwpg";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  for (SamplerKind k : {SamplerKind::marginal_mh, SamplerKind::pmmh, SamplerKind::mcmc_ais,
                        SamplerKind::mwpg}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError("unknown sampler kind '" + name + "'");
}

std::string SamplerConfig::fingerprint() const {
  std::ostringstream os;
  os << "kind=" << to_string(kind) << ";rw_sd=" << join(rw.sd())
     << ";rw_scale=" << (rw.scale() == RwScale::identity ? "identity" : "sqrt");
  if (kind != SamplerKind::marginal_mh) {
    os << ";N=" << particles << ";proposal=" << proposal_name(proposal);
  }
  if (kind == SamplerKind::mcmc_ais) {
    os << ";K=" << intermediate_steps;
    if (!schedule.empty()) os << ";schedule=" << join(schedule);
  }
  if (kind == SamplerKind::mcmc_ais || kind == SamplerKind::mwpg) {
    os << ";bs=" << (backward_sampling ? 1 : 0);
  }
  return os.str();
}

StepOutcome sampler_step(ChainState& state, const StateSpaceModel& model, const Dataset& data,
                         const SamplerConfig& config, ChainRngs& rngs) {
  switch (config.kind) {
    case SamplerKind::marginal_mh:
      return marginal_mh_step(state, model, data, config.rw, rngs);
    case SamplerKind::pmmh:
      return pmmh_step(state, model, data, config.rw, {config.particles, config.proposal}, rngs);
    case SamplerKind::mcmc_ais:
      return mcmc_ais_step(state, model, data, config.rw,
                           {config.intermediate_steps, config.schedule, config.particles,
                            config.backward_sampling, config.proposal},
                           rngs);
    case SamplerKind::mwpg:
      return mwpg_step(state, model, data, config.rw,
                       {config.particles, config.backward_sampling, config.proposal}, rngs);
  }
  throw std::logic_error("unhandled sampler kind");
}

ChainState initial_state(const StateSpaceModel& model, const Dataset& data,
                         const SamplerConfig& config, ChainRngs& rngs,
                         std::optional<ParamVector> theta) {
  ChainState s;
  s.theta = theta ? std::move(*theta) : model.sample_prior(rngs.kernel);
  require_in_domain(model, s.theta);
  const Proposal& prop = resolve(config.proposal);
  switch (config.kind) {
    case SamplerKind::marginal_mh:
      break;
    case SamplerKind::pmmh: {
      const ParticleSystem ps = smc_run(model, s.theta, data, prop, config.particles, rngs.kernel);
      s.cached_loglike = log_likelihood_estimate(ps).value;
      break;
    }
    case SamplerKind::mcmc_ais:
    case SamplerKind::mwpg:
      s.latent = draw_reference_path(model, s.theta, data, prop, config.particles, 0, rngs.kernel);
      break;
  }
  return s;
}

std::vector<double> ChainTrace::coordinate(std::size_t i, bool after_burn_in) const {
  const std::size_t start = after_burn_in ? std::min(burn_in, iterations()) : 0;
  std::vector<double> out;
  out.reserve(iterations() - start);
  for (std::size_t n = start; n < iterations(); ++n) out.push_back(theta[n * param_dim + i]);
  return out;
}

double ChainTrace::acceptance_rate(bool after_burn_in) const {
  const std::size_t start = after_burn_in ? std::min(burn_in, iterations()) : 0;
  if (start >= iterations()) return 0.0;
  std::size_t acc = 0;
  for (std::size_t n = start; n < iterations(); ++n) acc += accepted[n];
  return static_cast<double>(acc) / static_cast<double>(iterations() - start);
}

ChainTrace run_chain(const StateSpaceModel& model, const Dataset& data,
                     const SamplerConfig& config, const RunOptions& options, ChainState state,
                     ChainRngs rngs) {
  if (options.iterations <= options.burn_in) {
    throw std::invalid_argument("iterations must exceed burn-in");
  }
  const std::size_t d = model.param_dim();
  ChainTrace trace;
  trace.param_dim = d;
  trace.burn_in = options.burn_in;
  trace.seed = rngs.seed;
  trace.fingerprint = config.fingerprint();
  trace.theta.reserve(options.iterations * d);
  trace.increment.reserve(options.iterations * d);
  trace.accepted.reserve(options.iterations);
  trace.log_r.reserve(options.iterations);

  for (std::size_t n = 0; n < options.iterations; ++n) {
    StepOutcome out;
    try {
      out = sampler_step(state, model, data, config, rngs);
    } catch (const std::exception& e) {
      throw ChainError(n, e.what());
    }
    trace.theta.insert(trace.theta.end(), state.theta.begin(), state.theta.end());
    if (out.increment.size() == d) {
      trace.increment.insert(trace.increment.end(), out.increment.begin(), out.increment.end());
    } else {
      trace.increment.insert(trace.increment.end(), d, 0.0);
    }
    trace.accepted.push_back(out.accepted ? 1 : 0);
    trace.log_r.push_back(out.log_r);
    if (out.degenerate) ++trace.degenerate_events;
    if (options.latent_every > 0 && state.latent && (n + 1) % options.latent_every == 0) {
      trace.latent_iterations.push_back(n);
      trace.latent_snapshots.push_back(*state.latent);
    }
  }
  return trace;
}

SpsaEstimate spsa_gradient_estimate(const StateSpaceModel& model, const Dataset& data,
                                    ParamSpan theta, ParamSpan delta, const BridgeConfig& bridge,
                                    std::size_t replicates, RngStream& rng, std::size_t warmup) {
  const std::size_t d = model.param_dim();
  if (theta.size() != d || delta.size() != d) throw DomainError("SPSA dimension mismatch");
  if (replicates < 2) throw std::invalid_argument("SPSA needs at least two replicates");
  ParamVector lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (delta[i] == 0.0) throw DomainError("SPSA perturbation has a zero component");
    lo[i] = theta[i] - delta[i];
    hi[i] = theta[i] + delta[i];
  }
  require_in_domain(model, lo);
  require_in_domain(model, hi);
  const AnnealingPath path = bridge.make_path(lo, hi);
  const StageKernel kernel = bridge.kernel();
  const Proposal& prop = resolve(bridge.proposal);

  SpsaEstimate est;
  est.log_ratios.resize(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    RngStream rep = rng.derive(r);
    const LatentPath x0 = draw_reference_path(model, lo, data, prop, bridge.particles, warmup, rep);
    est.log_ratios[r] = ais_csmc_run(x0, path, model, data, kernel, rep).log_value;
  }
  double mean = 0.0;
  for (double v : est.log_ratios) mean += v;
  mean /= static_cast<double>(replicates);
  double ss = 0.0;
  for (double v : est.log_ratios) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / static_cast<double>(replicates - 1) / static_cast<double>(replicates));
  est.gradient.resize(d);
  est.std_error.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    est.gradient[i] = mean / (2.0 * delta[i]);
    est.std_error[i] = se / std::abs(2.0 * delta[i]);
  }
  return est;
}

ParamVector spsa_exact_gradient(const StateSpaceModel& model, const Dataset& data,
                                ParamSpan theta, ParamSpan delta) {
  const ExactLikelihood* exact = model.exact_likelihood();
  if (exact == nullptr) throw UnsupportedOperation("model has no exact likelihood");
  const std::size_t d = model.param_dim();
  ParamVector lo(d), hi(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = theta[i] - delta[i];
    hi[i] = theta[i] + delta[i];
  }
  const double diff = exact->log_likelihood(hi, data) - exact->log_likelihood(lo, data);
  ParamVector g(d);
  for (std::size_t i = 0; i < d; ++i) g[i] = diff / (2.0 * delta[i]);
  return g;
}

}  // namespace bridgemc
