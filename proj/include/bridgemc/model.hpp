#ifndef BRIDGEMC_MODEL_HPP_
#define BRIDGEMC_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bridgemc/rng.hpp"

namespace bridgemc {

using ParamVector = std::vector<double>;
using ParamSpan = std::span<const double>;

inline constexpr double kLogTwoPi = 1.8378770664093454836;

inline double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

// A latent trajectory x_{1:T}, stored time-major with state_dim entries per
// time step.
class LatentPath {
 public:
  LatentPath() = default;
  LatentPath(std::size_t length, std::size_t state_dim)
      : state_dim_(state_dim), x_(length * state_dim, 0.0) {}
  LatentPath(std::vector<double> values, std::size_t state_dim);

  std::size_t length() const { return state_dim_ == 0 ? 0 : x_.size() / state_dim_; }
  std::size_t state_dim() const { return state_dim_; }

  std::span<const double> state(std::size_t t) const {
    return {x_.data() + t * state_dim_, state_dim_};
  }
  std::span<double> state(std::size_t t) { return {x_.data() + t * state_dim_, state_dim_}; }

  const std::vector<double>& values() const { return x_; }
  std::vector<double>& values() { return x_; }

  bool operator==(const LatentPath&) const = default;

 private:
  std::size_t state_dim_ = 1;
  std::vector<double> x_;
};

// Observations y_{1:T} plus optional simulation metadata.
struct Dataset {
  std::size_t obs_dim = 1;
  std::vector<double> y;  // T * obs_dim, time-major
  std::optional<LatentPath> x_true;
  std::optional<ParamVector> theta_true;
  std::optional<std::uint64_t> seed;

  std::size_t length() const { return obs_dim == 0 ? 0 : y.size() / obs_dim; }
  std::span<const double> obs(std::size_t t) const { return {y.data() + t * obs_dim, obs_dim}; }

  // First `length` observations (and latent truth, when present).
  Dataset prefix(std::size_t length) const;

  // Throws DomainError if empty or non-finite.
  void validate() const;
};

// Open box constraints lower < theta_i < upper; infinities mean unbounded.
struct ParamDomain {
  std::vector<double> lower;
  std::vector<double> upper;

  bool contains(ParamSpan theta) const;
};

class ExactLikelihood;

// A state-space model: initial density mu, transition f, observation g,
// prior eta. All densities are evaluated in log space. Time indices are
// zero-based; `t` names the time of the state being drawn or evaluated.
//
// Implementations are immutable after construction and may be shared across
// threads.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t param_dim() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t obs_dim() const = 0;
  virtual const ParamDomain& param_domain() const = 0;

  virtual double init_logdensity(ParamSpan theta, std::span<const double> x) const = 0;
  virtual double trans_logdensity(ParamSpan theta, std::size_t t, std::span<const double> prev,
                                  std::span<const double> x) const = 0;
  virtual double obs_logdensity(ParamSpan theta, std::size_t t, std::span<const double> x,
                                std::span<const double> y) const = 0;
  virtual double prior_logdensity(ParamSpan theta) const = 0;

  virtual void sample_init(ParamSpan theta, RngStream& rng, std::span<double> out) const = 0;
  virtual void sample_trans(ParamSpan theta, std::size_t t, std::span<const double> prev,
                            RngStream& rng, std::span<double> out) const = 0;
  virtual void sample_obs(ParamSpan theta, std::size_t t, std::span<const double> x,
                          RngStream& rng, std::span<double> out) const = 0;
  virtual ParamVector sample_prior(RngStream& rng) const = 0;

  // out[i] = trans_logdensity(theta, t, prev_i, x) for the states packed in
  // `prevs` (state_dim values each). Backward sampling calls this once per t.
  virtual void trans_logdensities(ParamSpan theta, std::size_t t, std::span<const double> prevs,
                                  std::span<const double> x, std::span<double> out) const;

  // False when f_theta cannot be evaluated pointwise (backward sampling is
  // then unavailable).
  virtual bool has_transition_density() const { return true; }

  // True when f_theta(x_{t-1}, x_t) does not depend on x_{t-1}.
  virtual bool transition_ignores_previous() const { return false; }

  // Non-null when the model can evaluate its likelihood in closed form.
  virtual const ExactLikelihood* exact_likelihood() const { return nullptr; }
};

using ModelSpec = std::shared_ptr<const StateSpaceModel>;

class ExactLikelihood {
 public:
  virtual ~ExactLikelihood() = default;
  virtual double log_likelihood(ParamSpan theta, const Dataset& data) const = 0;
};

// log p_theta(x_{1:T}, y_{1:T}).
double joint_logdensity(const StateSpaceModel& model, ParamSpan theta, const LatentPath& x,
                        const Dataset& data);

// Forward simulation of (x_{1:T}, y_{1:T}) from the model at theta.
Dataset simulate(const StateSpaceModel& model, ParamSpan theta, std::size_t length,
                 RngStream& rng);

// Throws DomainError when theta is outside the model's parameter domain.
void require_in_domain(const StateSpaceModel& model, ParamSpan theta);

}  // namespace bridgemc

#endif  // BRIDGEMC_MODEL_HPP_
