#include <cmath>
#include <limits>

#include "bridgemc/errors.hpp"
#include "bridgemc/models.hpp"

namespace bridgemc {

double inverse_gamma_logpdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

NonlinearBenchmarkModel::NonlinearBenchmarkModel(double prior_shape, double prior_scale)
    : shape_(prior_shape), scale_(prior_scale) {
  if (!(prior_shape > 0.0) || !(prior_scale > 0.0)) {
    throw DomainError("nonlinear_benchmark_model: prior shape and scale must be positive");
  }
  log_norm_ = shape_ * std::log(scale_) - std::lgamma(shape_);
  const double inf = std::numeric_limits<double>::infinity();
  domain_.lower = {0.0, 0.0};
  domain_.upper = {inf, inf};
}

double NonlinearBenchmarkModel::drift(std::size_t t, double prev) {
  return 0.5 * prev + 25.0 * prev / (1.0 + prev * prev) +
         8.0 * std::cos(1.2 * static_cast<double>(t + 1));
}

double NonlinearBenchmarkModel::init_logdensity(ParamSpan, std::span<const double> x) const {
  return normal_logpdf(x[0], 0.0, 10.0);
}

double NonlinearBenchmarkModel::trans_logdensity(ParamSpan theta, std::size_t t,
                                                 std::span<const double> prev,
                                                 std::span<const double> x) const {
  return normal_logpdf(x[0], drift(t, prev[0]), theta[0]);
}

void NonlinearBenchmarkModel::trans_logdensities(ParamSpan theta, std::size_t t,
                                                 std::span<const double> prevs,
                                                 std::span<const double> x,
                                                 std::span<double> out) const {
  const double seasonal = 8.0 * std::cos(1.2 * static_cast<double>(t + 1));
  const double var = theta[0];
  const double c = -0.5 * (kLogTwoPi + std::log(var));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double p = prevs[i];
    const double d = x[0] - (0.5 * p + 25.0 * p / (1.0 + p * p) + seasonal);
    out[i] = c - 0.5 * d * d / var;
  }
}

double NonlinearBenchmarkModel::obs_logdensity(ParamSpan theta, std::size_t,
                                               std::span<const double> x,
                                               std::span<const double> y) const {
  return normal_logpdf(y[0], x[0] * x[0] / 20.0, theta[1]);
}

double NonlinearBenchmarkModel::prior_logdensity(ParamSpan theta) const {
  if (!(theta[0] > 0.0) || !(theta[1] > 0.0)) return -std::numeric_limits<double>::infinity();
  return 2.0 * log_norm_ - (shape_ + 1.0) * (std::log(theta[0]) + std::log(theta[1])) -
         scale_ / theta[0] - scale_ / theta[1];
}

void NonlinearBenchmarkModel::sample_init(ParamSpan, RngStream& rng, std::span<double> out) const {
  out[0] = rng.normal(0.0, std::sqrt(10.0));
}

void NonlinearBenchmarkModel::sample_trans(ParamSpan theta, std::size_t t,
                                           std::span<const double> prev, RngStream& rng,
                                           std::span<double> out) const {
  out[0] = rng.normal(drift(t, prev[0]), std::sqrt(theta[0]));
}

void NonlinearBenchmarkModel::sample_obs(ParamSpan theta, std::size_t, std::span<const double> x,
                                         RngStream& rng, std::span<double> out) const {
  out[0] = rng.normal(x[0] * x[0] / 20.0, std::sqrt(theta[1]));
}

ParamVector NonlinearBenchmarkModel::sample_prior(RngStream& rng) const {
  ParamVector theta(2);
  for (double& v : theta) {
    do {
      v = scale_ / rng.gamma(shape_, 1.0);
    } while (!(v >= 1e-3 && v <= 1e3));
  }
  return theta;
}

std::shared_ptr<const NonlinearBenchmarkModel> nonlinear_benchmark_model(double prior_shape,
                                                                         double prior_scale) {
  return std::make_shared<const NonlinearBenchmarkModel>(prior_shape, prior_scale);
}

}  // namespace bridgemc
