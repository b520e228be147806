#include <limits>

#include "bridgemc/errors.hpp"
#include "bridgemc/models.hpp"

namespace bridgemc {

IidGaussianModel::IidGaussianModel(const Params& p) : p_(p) {
  if (!(p.sigma_x2 > 0.0) || !(p.sigma_y2 > 0.0) || !(p.prior_var > 0.0)) {
    throw DomainError("iid_gaussian_model: variances must be positive");
  }
  if (!(p.a >= 0.0 && p.a <= 1.0)) throw DomainError("iid_gaussian_model: a must lie in [0, 1]");
  const double inf = std::numeric_limits<double>::infinity();
  domain_.lower = {-inf};
  domain_.upper = {inf};
  cond_var_ = 1.0 / (1.0 / p.sigma_x2 + 1.0 / p.sigma_y2);
  log_cond_var_ = std::log(cond_var_);
  log_sx2_ = std::log(p.sigma_x2);
  log_sy2_ = std::log(p.sigma_y2);
}

namespace {
inline double gauss_log(double d, double var, double log_var) {
  return -0.5 * (kLogTwoPi + log_var + d * d / var);
}
}  // namespace

double IidGaussianModel::init_logdensity(ParamSpan theta, std::span<const double> x) const {
  return gauss_log(x[0] - (1.0 - p_.a) * theta[0], p_.sigma_x2, log_sx2_);
}

double IidGaussianModel::trans_logdensity(ParamSpan theta, std::size_t, std::span<const double>,
                                          std::span<const double> x) const {
  return gauss_log(x[0] - (1.0 - p_.a) * theta[0], p_.sigma_x2, log_sx2_);
}

double IidGaussianModel::obs_logdensity(ParamSpan theta, std::size_t, std::span<const double> x,
                                        std::span<const double> y) const {
  return gauss_log(y[0] - p_.a * theta[0] - x[0], p_.sigma_y2, log_sy2_);
}

double IidGaussianModel::prior_logdensity(ParamSpan theta) const {
  return normal_logpdf(theta[0], p_.prior_mean, p_.prior_var);
}

void IidGaussianModel::sample_init(ParamSpan theta, RngStream& rng, std::span<double> out) const {
  out[0] = rng.normal((1.0 - p_.a) * theta[0], std::sqrt(p_.sigma_x2));
}

void IidGaussianModel::sample_trans(ParamSpan theta, std::size_t, std::span<const double>,
                                    RngStream& rng, std::span<double> out) const {
  out[0] = rng.normal((1.0 - p_.a) * theta[0], std::sqrt(p_.sigma_x2));
}

void IidGaussianModel::sample_obs(ParamSpan theta, std::size_t, std::span<const double> x,
                                  RngStream& rng, std::span<double> out) const {
  out[0] = rng.normal(p_.a * theta[0] + x[0], std::sqrt(p_.sigma_y2));
}

ParamVector IidGaussianModel::sample_prior(RngStream& rng) const {
  return {rng.normal(p_.prior_mean, std::sqrt(p_.prior_var))};
}

double IidGaussianModel::log_likelihood(ParamSpan theta, const Dataset& data) const {
  const double s2 = p_.sigma_x2 + p_.sigma_y2;
  double ll = 0.0;
  for (double y : data.y) ll += normal_logpdf(y, theta[0], s2);
  return ll;
}

GaussianMoments IidGaussianModel::posterior(const Dataset& data) const {
  const double s2 = p_.sigma_x2 + p_.sigma_y2;
  double sum = 0.0;
  for (double y : data.y) sum += y;
  const double precision = 1.0 / p_.prior_var + static_cast<double>(data.length()) / s2;
  return {(p_.prior_mean / p_.prior_var + sum / s2) / precision, 1.0 / precision};
}

GaussianMoments IidGaussianModel::conditional(double theta, double y) const {
  const double mean =
      cond_var_ * ((1.0 - p_.a) * theta / p_.sigma_x2 + (y - p_.a * theta) / p_.sigma_y2);
  return {mean, cond_var_};
}

double IidGaussianModel::conditional_logdensity(double theta, double x, double y) const {
  const auto c = conditional(theta, y);
  return normal_logpdf(x, c.mean, c.var);
}

double IidGaussianModel::score(double theta, const Dataset& data) const {
  const double s2 = p_.sigma_x2 + p_.sigma_y2;
  double sum = 0.0;
  for (double y : data.y) sum += y - theta;
  return sum / s2;
}

LatentPath IidGaussianModel::sample_conditional_path(double theta, const Dataset& data,
                                                     RngStream& rng) const {
  LatentPath x(data.length(), 1);
  const double sd = std::sqrt(cond_var_);
  for (std::size_t t = 0; t < data.length(); ++t) {
    x.state(t)[0] = rng.normal(conditional(theta, data.obs(t)[0]).mean, sd);
  }
  return x;
}

std::shared_ptr<const IidGaussianModel> iid_gaussian_model(double a, double sigma_x2,
                                                           double sigma_y2, double prior_mean,
                                                           double prior_var) {
  return std::make_shared<const IidGaussianModel>(
      IidGaussianModel::Params{a, sigma_x2, sigma_y2, prior_mean, prior_var});
}

}  // namespace bridgemc
