#ifndef BRIDGEMC_MODELS_HPP_
#define BRIDGEMC_MODELS_HPP_

#include <memory>

#include "bridgemc/model.hpp"

namespace bridgemc {

struct GaussianMoments {
  double mean;
  double var;
};

// Scalar model with x_t iid N((1-a) theta, sx2) and y_t | x_t ~ N(a theta + x_t, sy2),
// prior theta ~ N(prior_mean, prior_var). The marginal of y_t is N(theta, sx2 + sy2)
// whatever the value of a, which makes the likelihood, the posterior of theta and
// the conditionals p_theta(x_t | y_t) available in closed form.
class IidGaussianModel final : public StateSpaceModel, public ExactLikelihood {
 public:
  struct Params {
    double a = 1.0;
    double sigma_x2 = 1.0;
    double sigma_y2 = 0.01;
    double prior_mean = 0.0;
    double prior_var = 1e5;
  };

  explicit IidGaussianModel(const Params& p);

  const Params& params() const { return p_; }

  std::string name() const override { return "iid_gaussian"; }
  std::size_t param_dim() const override { return 1; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  const ParamDomain& param_domain() const override { return domain_; }

  double init_logdensity(ParamSpan theta, std::span<const double> x) const override;
  double trans_logdensity(ParamSpan theta, std::size_t t, std::span<const double> prev,
                          std::span<const double> x) const override;
  double obs_logdensity(ParamSpan theta, std::size_t t, std::span<const double> x,
                        std::span<const double> y) const override;
  double prior_logdensity(ParamSpan theta) const override;

  void sample_init(ParamSpan theta, RngStream& rng, std::span<double> out) const override;
  void sample_trans(ParamSpan theta, std::size_t t, std::span<const double> prev, RngStream& rng,
                    std::span<double> out) const override;
  void sample_obs(ParamSpan theta, std::size_t t, std::span<const double> x, RngStream& rng,
                  std::span<double> out) const override;
  ParamVector sample_prior(RngStream& rng) const override;

  bool transition_ignores_previous() const override { return true; }
  const ExactLikelihood* exact_likelihood() const override { return this; }

  // Analytic oracles.
  double log_likelihood(ParamSpan theta, const Dataset& data) const override;
  GaussianMoments posterior(const Dataset& data) const;
  GaussianMoments conditional(double theta, double y) const;
  double conditional_logdensity(double theta, double x, double y) const;
  // Variance of p_theta(x_t | y_t) (free of theta and y) and its log.
  double conditional_var() const { return cond_var_; }
  double log_conditional_var() const { return log_cond_var_; }
  // d/dtheta log l_theta(y_{1:T}).
  double score(double theta, const Dataset& data) const;
  // Draws x_{1:T} exactly from p_theta(x_{1:T} | y_{1:T}).
  LatentPath sample_conditional_path(double theta, const Dataset& data, RngStream& rng) const;

 private:
  Params p_;
  ParamDomain domain_;
  double cond_var_, log_cond_var_;
  double log_sx2_, log_sy2_;
};

// x_t = x_{t-1}/2 + 25 x_{t-1}/(1 + x_{t-1}^2) + 8 cos(1.2 t) + v_t,  v_t ~ N(0, sigma_v2)
// y_t = x_t^2 / 20 + w_t,                                            w_t ~ N(0, sigma_w2)
// x_1 ~ N(0, 10), theta = (sigma_v2, sigma_w2) with independent inverse-gamma priors.
// The drift uses the one-based time t = index + 1.
class NonlinearBenchmarkModel final : public StateSpaceModel {
 public:
  NonlinearBenchmarkModel(double prior_shape, double prior_scale);

  std::string name() const override { return "nonlinear_benchmark"; }
  std::size_t param_dim() const override { return 2; }
  std::size_t state_dim() const override { return 1; }
  std::size_t obs_dim() const override { return 1; }
  const ParamDomain& param_domain() const override { return domain_; }

  double init_logdensity(ParamSpan theta, std::span<const double> x) const override;
  double trans_logdensity(ParamSpan theta, std::size_t t, std::span<const double> prev,
                          std::span<const double> x) const override;
  double obs_logdensity(ParamSpan theta, std::size_t t, std::span<const double> x,
                        std::span<const double> y) const override;
  double prior_logdensity(ParamSpan theta) const override;

  void sample_init(ParamSpan theta, RngStream& rng, std::span<double> out) const override;
  void sample_trans(ParamSpan theta, std::size_t t, std::span<const double> prev, RngStream& rng,
                    std::span<double> out) const override;
  void sample_obs(ParamSpan theta, std::size_t t, std::span<const double> x, RngStream& rng,
                  std::span<double> out) const override;
  void trans_logdensities(ParamSpan theta, std::size_t t, std::span<const double> prevs,
                          std::span<const double> x, std::span<double> out) const override;
  // Prior draw restricted to [1e-3, 1e3] per coordinate by rejection.
  ParamVector sample_prior(RngStream& rng) const override;

  static double drift(std::size_t t, double prev);

  double prior_shape() const { return shape_; }
  double prior_scale() const { return scale_; }

 private:
  double shape_, scale_;
  double log_norm_;  // shape * log(scale) - lgamma(shape)
  ParamDomain domain_;
};

double inverse_gamma_logpdf(double x, double shape, double scale);

std::shared_ptr<const IidGaussianModel> iid_gaussian_model(double a, double sigma_x2,
                                                           double sigma_y2, double prior_mean,
                                                           double prior_var);

std::shared_ptr<const NonlinearBenchmarkModel> nonlinear_benchmark_model(double prior_shape = 0.01,
                                                                         double prior_scale = 0.01);

}  // namespace bridgemc

#endif  // BRIDGEMC_MODELS_HPP_
