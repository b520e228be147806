#include "bridgemc/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bridgemc/errors.hpp"

namespace bridgemc {

namespace {

double mean_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

double autocov(std::span<const double> c, std::size_t lag) {
  const std::size_t n = c.size();
  double s = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
  return s / static_cast<double>(n);
}

}  // namespace

IacEstimate iac_time(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw std::invalid_argument("iac_time needs at least 100 values");
  const double m = mean_of(series);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = series[i] - m;
  const double g0 = autocov(c, 0);
  IacEstimate est;
  if (!(g0 > 0.0) || g0 <= 1e-300) {
    est.degenerate = true;
    return est;
  }
  // Pair sums Gamma_k = gamma(2k) + gamma(2k+1), kept while positive and
  // forced nonincreasing.
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  std::size_t lags = 0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (k == 0 ? g0 : autocov(c, 2 * k)) + autocov(c, 2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    sum += pair;
    lags = 2 * k + 2;
  }
  est.value = std::max(1.0, (2.0 * sum - g0) / g0);
  est.window = lags;
  return est;
}

double batch_means_ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) throw std::invalid_argument("batch means need at least 4 values");
  const auto batches = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  const std::size_t b = n / batches;
  const double m = mean_of(series);
  double var = 0.0;
  for (double x : series) var += (x - m) * (x - m);
  var /= static_cast<double>(n - 1);
  if (!(var > 0.0)) return static_cast<double>(n);
  const std::size_t used = batches * b;
  const double mu = mean_of(series.first(used));
  double vb = 0.0;
  for (std::size_t j = 0; j < batches; ++j) {
    const double bm = mean_of(series.subspan(j * b, b));
    vb += (bm - mu) * (bm - mu);
  }
  vb /= static_cast<double>(batches - 1);
  const double ess = static_cast<double>(n) * var / (static_cast<double>(b) * vb);
  return std::min(ess, static_cast<double>(n));
}

std::vector<double> msjd(std::span<const double> series, std::size_t dim, double scale) {
  if (dim == 0 || series.size() % dim != 0) throw std::invalid_argument("msjd: ragged series");
  const std::size_t len = series.size() / dim;
  if (len < 2) throw std::invalid_argument("msjd needs at least two states");
  std::vector<double> out(dim, 0.0);
  for (std::size_t n = 1; n < len; ++n) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = series[n * dim + i] - series[(n - 1) * dim + i];
      out[i] += d * d;
    }
  }
  for (double& v : out) v = v / static_cast<double>(len - 1) * scale;
  return out;
}

DiagnosticsReport summarize(const ChainTrace& trace, double msjd_scale) {
  DiagnosticsReport r;
  const std::size_t d = trace.param_dim;
  const std::size_t start = std::min(trace.burn_in, trace.iterations());
  r.n_samples = trace.iterations() - start;
  r.accept_rate = trace.acceptance_rate();
  const std::span<const double> post(trace.theta.data() + start * d, r.n_samples * d);
  if (r.n_samples >= 2) r.msjd = msjd(post, d, msjd_scale);
  for (std::size_t i = 0; i < d; ++i) {
    const std::vector<double> s = trace.coordinate(i);
    const double m = mean_of(s);
    double v = 0.0;
    for (double x : s) v += (x - m) * (x - m);
    r.mean.push_back(m);
    r.sd.push_back(s.size() > 1 ? std::sqrt(v / static_cast<double>(s.size() - 1)) : 0.0);
    if (s.size() >= 100) {
      const IacEstimate iac = iac_time(s);
      r.iac.push_back(iac.value);
      r.iac_degenerate.push_back(iac.degenerate);
      r.ess.push_back(static_cast<double>(s.size()) / iac.value);
      r.ess_batch_means.push_back(batch_means_ess(s));
    }
  }
  return r;
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double kolmogorov_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0, sign = 1.0, prev_term = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = sign * 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) <= 1e-3 * prev_term || std::abs(term) <= 1e-8 * sum) {
      return std::clamp(sum, 0.0, 1.0);
    }
    sign = -sign;
    prev_term = std::abs(term);
  }
  return 1.0;
}

KsResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_test on an empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_pvalue(d, s.size())};
}

LambdaSummary summarize_lambda(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("need at least two Lambda values");
  LambdaSummary s;
  s.mean = mean_of(values);
  double v = 0.0;
  for (double x : values) v += (x - s.mean) * (x - s.mean);
  s.variance = v / static_cast<double>(n - 1);
  s.se_mean = std::sqrt(s.variance / static_cast<double>(n));
  s.coupling = s.mean + 0.5 * s.variance;
  s.coupling_z = s.se_mean > 0.0 ? std::abs(s.coupling) / s.se_mean : 0.0;
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(values[i]);
  s.mean_exp = mean_of(e);
  double ve = 0.0;
  for (double x : e) ve += (x - s.mean_exp) * (x - s.mean_exp);
  s.se_mean_exp = std::sqrt(ve / static_cast<double>(n - 1) / static_cast<double>(n));
  if (s.variance > 0.0) {
    const double m = s.mean, sd = std::sqrt(s.variance);
    s.ks = ks_test(values, [m, sd](double x) { return normal_cdf(x, m, sd); });
  }
  return s;
}

double lambda_statistic(const IidGaussianModel& model, const Dataset& data, double theta,
                        double theta_mid, double theta_new, const LatentPath& x,
                        const LatentPath& x_new) {
  double lam = 0.0;
  for (std::size_t t = 0; t < data.length(); ++t) {
    const double y = data.obs(t)[0];
    const double a = x.state(t)[0];
    const double b = x_new.state(t)[0];
    lam += model.conditional_logdensity(theta_mid, a, y) - model.conditional_logdensity(theta, a, y) +
           model.conditional_logdensity(theta_new, b, y) -
           model.conditional_logdensity(theta_mid, b, y);
  }
  return lam;
}

LambdaCheck lambda_penalty_check(const StateSpaceModel& model, const Dataset& data, double theta,
                                 double epsilon, std::size_t particles, std::size_t replicates,
                                 const RngStream& rng, std::shared_ptr<const Proposal> proposal,
                                 std::size_t threads) {
  const auto* iid = dynamic_cast<const IidGaussianModel*>(&model);
  if (iid == nullptr) {
    throw UnsupportedOperation("the Lambda_T check needs a transition that ignores the previous state");
  }
  if (replicates < 2) throw std::invalid_argument("need at least two replicates");
  const double T = static_cast<double>(data.length());
  const double theta_new = theta + epsilon / std::sqrt(T);
  const double theta_mid = theta + epsilon / (2.0 * std::sqrt(T));
  const Proposal& prop = proposal ? *proposal : *bootstrap_proposal();

  LambdaCheck out;
  out.sample.theta = theta;
  out.sample.epsilon = epsilon;
  out.sample.length = data.length();
  out.sample.particles = particles;
  {
    const auto& p = iid->params();
    const double v = iid->conditional(theta, 0.0).var;
    const double dm = v * ((1.0 - p.a) / p.sigma_x2 - p.a / p.sigma_y2);
    out.sample.sigma2_target = 0.5 * epsilon * epsilon * dm * dm / v;
  }
  out.sample.values.assign(replicates, 0.0);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < replicates; r = next++) {
      try {
        RngStream rep = rng.derive(r);
        const LatentPath x = iid->sample_conditional_path(theta, data, rep);
        const ParamVector mid{theta_mid};
        const LatentPath xn = csmc_run(true, model, mid, data, prop, particles, x, rep);
        out.sample.values[r] = lambda_statistic(*iid, data, theta, theta_mid, theta_new, x, xn);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = replicates;
      }
    }
  };
  const std::size_t nthreads = std::max<std::size_t>(1, std::min(threads, replicates));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  out.summary = summarize_lambda(out.sample.values);
  return out;
}

}  // namespace bridgemc
