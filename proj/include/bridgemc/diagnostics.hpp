#ifndef BRIDGEMC_DIAGNOSTICS_HPP_
#define BRIDGEMC_DIAGNOSTICS_HPP_

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bridgemc/models.hpp"
#include "bridgemc/samplers.hpp"
#include "bridgemc/smc.hpp"

namespace bridgemc {

struct IacEstimate {
  double value = 1.0;
  bool degenerate = false;  // constant series
  std::size_t window = 0;   // number of lags summed
};

// Integrated autocorrelation time with Geyer's initial monotone sequence
// truncation. Needs at least 100 values; clipped below at 1.
IacEstimate iac_time(std::span<const double> series);

// Batch-means effective sample size, floor(sqrt(n)) batches, capped at n.
double batch_means_ess(std::span<const double> series);

// Mean squared successive difference per coordinate of a row-major
// (length x dim) series, multiplied by `scale` (e.g. T).
std::vector<double> msjd(std::span<const double> series, std::size_t dim, double scale = 1.0);

struct DiagnosticsReport {
  std::vector<double> iac;
  std::vector<bool> iac_degenerate;
  std::vector<double> msjd;
  std::vector<double> ess;
  std::vector<double> ess_batch_means;
  std::vector<double> mean;
  std::vector<double> sd;
  double accept_rate = 0.0;
  std::size_t n_samples = 0;
};

// Post-burn-in summary of a chain; msjd is multiplied by msjd_scale.
DiagnosticsReport summarize(const ChainTrace& trace, double msjd_scale = 1.0);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test against a continuous cdf.
KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);

// Asymptotic p-value for the statistic D on n observations.
double kolmogorov_pvalue(double d, std::size_t n);

struct LambdaSample {
  std::vector<double> values;
  double theta = 0.0;
  double epsilon = 0.0;
  std::size_t length = 0;
  std::size_t particles = 0;
  // sigma^2 = (eps^2 / 2) E[-d^2/dtheta^2 log p_theta(X | Y)] from the model's
  // conditional; the limit law is N(-sigma^2 / 2, sigma^2).
  double sigma2_target = 0.0;
};

struct LambdaSummary {
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double coupling = 0.0;       // mean + variance / 2
  double coupling_z = 0.0;     // |coupling| / se_mean
  double mean_exp = 0.0;       // average of exp(Lambda)
  double se_mean_exp = 0.0;
  KsResult ks;                 // against N(mean, variance)
};

struct LambdaCheck {
  LambdaSample sample;
  LambdaSummary summary;
};

LambdaSummary summarize_lambda(std::span<const double> values);

// Lambda_T of the K = 1 midpoint bridge: x from the exact conditional at
// theta, x' from one cSMC-BS sweep at theta~ = theta + eps / (2 sqrt(T))
// started at x, theta' = theta + eps / sqrt(T). Replicate r uses rng.derive(r),
// so the result does not depend on `threads`.
LambdaCheck lambda_penalty_check(const StateSpaceModel& model, const Dataset& data, double theta,
                                 double epsilon, std::size_t particles, std::size_t replicates,
                                 const RngStream& rng,
                                 std::shared_ptr<const Proposal> proposal = nullptr,
                                 std::size_t threads = 1);

// Lambda_T for a given pair of paths.
double lambda_statistic(const IidGaussianModel& model, const Dataset& data, double theta,
                        double theta_mid, double theta_new, const LatentPath& x,
                        const LatentPath& x_new);

}  // namespace bridgemc

#endif  // BRIDGEMC_DIAGNOSTICS_HPP_
