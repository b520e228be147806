#include "bridgemc/model.hpp"

#include <algorithm>
#include <sstream>

#include "bridgemc/errors.hpp"

namespace bridgemc {

LatentPath::LatentPath(std::vector<double> values, std::size_t state_dim)
    : state_dim_(state_dim), x_(std::move(values)) {
  if (state_dim_ == 0 || x_.size() % state_dim_ != 0) {
    throw std::invalid_argument("latent path size is not a multiple of state_dim");
  }
}

Dataset Dataset::prefix(std::size_t length) const {
  if (length > this->length()) throw std::invalid_argument("prefix longer than dataset");
  Dataset out;
  out.obs_dim = obs_dim;
  out.y.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(length * obs_dim));
  if (x_true) {
    const auto d = x_true->state_dim();
    std::vector<double> xs(x_true->values().begin(),
                           x_true->values().begin() + static_cast<std::ptrdiff_t>(length * d));
    out.x_true = LatentPath(std::move(xs), d);
  }
  out.theta_true = theta_true;
  out.seed = seed;
  return out;
}

void Dataset::validate() const {
  if (obs_dim == 0 || y.empty() || y.size() % obs_dim != 0) {
    throw DomainError("dataset must hold at least one observation");
  }
  if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
    throw DomainError("dataset contains non-finite observations");
  }
}

bool ParamDomain::contains(ParamSpan theta) const {
  if (theta.size() != lower.size()) return false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] > lower[i] && theta[i] < upper[i])) return false;
  }
  return true;
}

void require_in_domain(const StateSpaceModel& model, ParamSpan theta) {
  if (theta.size() != model.param_dim()) {
    std::ostringstream os;
    os << model.name() << ": expected " << model.param_dim() << " parameters, got "
       << theta.size();
    throw DomainError(os.str());
  }
  if (!model.param_domain().contains(theta)) {
    throw DomainError(model.name() + ": parameter outside its domain");
  }
}

double joint_logdensity(const StateSpaceModel& model, ParamSpan theta, const LatentPath& x,
                        const Dataset& data) {
  const std::size_t T = data.length();
  if (x.length() != T) throw std::invalid_argument("latent path and dataset lengths differ");
  double lp = model.init_logdensity(theta, x.state(0)) + model.obs_logdensity(theta, 0, x.state(0), data.obs(0));
  for (std::size_t t = 1; t < T; ++t) {
    lp += model.trans_logdensity(theta, t, x.state(t - 1), x.state(t));
    lp += model.obs_logdensity(theta, t, x.state(t), data.obs(t));
  }
  return lp;
}

Dataset simulate(const StateSpaceModel& model, ParamSpan theta, std::size_t length,
                 RngStream& rng) {
  require_in_domain(model, theta);
  if (length == 0) throw DomainError("simulate: length must be at least 1");
  const std::size_t dx = model.state_dim();
  const std::size_t dy = model.obs_dim();
  LatentPath x(length, dx);
  Dataset data;
  data.obs_dim = dy;
  data.y.assign(length * dy, 0.0);
  for (std::size_t t = 0; t < length; ++t) {
    if (t == 0) {
      model.sample_init(theta, rng, x.state(0));
    } else {
      model.sample_trans(theta, t, x.state(t - 1), rng, x.state(t));
    }
    model.sample_obs(theta, t, x.state(t), rng, {data.y.data() + t * dy, dy});
  }
  data.x_true = std::move(x);
  data.theta_true = ParamVector(theta.begin(), theta.end());
  data.seed = rng.seed();
  return data;
}

void StateSpaceModel::trans_logdensities(ParamSpan theta, std::size_t t,
                                         std::span<const double> prevs,
                                         std::span<const double> x, std::span<double> out) const {
  const std::size_t dx = state_dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = trans_logdensity(theta, t, prevs.subspan(i * dx, dx), x);
  }
}

}  // namespace bridgemc
