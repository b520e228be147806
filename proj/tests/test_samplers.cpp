#include <doctest.h>

#include <cmath>
#include <vector>

#include "bridgemc/diagnostics.hpp"
#include "bridgemc/errors.hpp"
#include "bridgemc/models.hpp"
#include "bridgemc/samplers.hpp"
#include "stats.hpp"

using namespace bridgemc;
using bridgemc::test::moments;

namespace {

Dataset iid_data(const StateSpaceModel& m, std::size_t T, std::uint64_t seed, double theta = 0.0) {
  RngStream rng(seed);
  return simulate(m, ParamVector{theta}, T, rng);
}

// sd so small that theta + sd * z == theta in double precision.
const RwProposal kFrozen({1e-300});

double sum_joint_diff(const IidGaussianModel& m, double a, double b, const LatentPath& x,
                      const Dataset& d) {
  double s = 0.0;
  for (std::size_t t = 0; t < d.length(); ++t) {
    const std::vector<double> xt{x.state(t)[0]};
    s += m.trans_logdensity(ParamVector{b}, t, {}, xt) + m.obs_logdensity(ParamVector{b}, t, xt, d.obs(t)) -
         m.trans_logdensity(ParamVector{a}, t, {}, xt) - m.obs_logdensity(ParamVector{a}, t, xt, d.obs(t));
  }
  return s;
}

}  // namespace

TEST_CASE("RwProposal: validation and length scaling") {
  CHECK_THROWS_AS(RwProposal({0.0}), DomainError);
  CHECK_THROWS_AS(RwProposal(std::vector<double>{}), DomainError);
  const RwProposal r = RwProposal::scaled_by_length({2.0, 4.0}, 16);
  CHECK(r.sd()[0] == 0.5);
  CHECK(r.sd()[1] == 1.0);
}

TEST_CASE("RwProposal: sqrt-scale Hastings term matches the transformed densities") {
  const RwProposal rw({0.3, 0.2}, RwScale::sqrt);
  const ParamVector th{4.0, 0.5}, pr{5.3, 0.21};
  // q(a -> b) = N(sqrt b; sqrt a, sd^2) / (2 sqrt b) per coordinate
  auto logq = [&](const ParamVector& a, const ParamVector& b) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
      s += normal_logpdf(std::sqrt(b[i]), std::sqrt(a[i]), rw.sd()[i] * rw.sd()[i]) - std::log(2.0 * std::sqrt(b[i]));
    }
    return s;
  };
  CHECK(rw.log_hastings(th, pr) == doctest::Approx(logq(pr, th) - logq(th, pr)).epsilon(1e-12));
  CHECK(RwProposal({1.0}).log_hastings(ParamVector{1.0}, ParamVector{3.0}) == 0.0);
}

TEST_CASE("marginal_mh_step: log_r is the likelihood ratio plus prior terms") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e12);
  const Dataset d = iid_data(*m, 30, 2);
  ChainState s{{0.1}, std::nullopt, std::nullopt, 0};
  ChainRngs rngs = ChainRngs::from_seed(5);
  const StepOutcome out = marginal_mh_step(s, *m, d, RwProposal({0.05}), rngs);
  const double ll = m->log_likelihood(out.proposed, d) - m->log_likelihood(ParamVector{0.1}, d);
  CHECK(out.log_r == doctest::Approx(ll).epsilon(1e-9));
  const auto nl = nonlinear_benchmark_model();
  CHECK_THROWS_AS(marginal_mh_step(s, *nl, d, RwProposal({0.1, 0.1}), rngs), UnsupportedOperation);
}

TEST_CASE("out-of-support proposals have log_r = -inf and are rejected") {
  const auto nl = nonlinear_benchmark_model();
  RngStream sim(1);
  const Dataset d = simulate(*nl, ParamVector{10.0, 1.0}, 10, sim);
  ChainRngs rngs = ChainRngs::from_seed(3);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::pmmh;
  cfg.particles = 10;
  cfg.rw = RwProposal({50.0, 50.0});
  ChainState s = initial_state(*nl, d, cfg, rngs, ParamVector{1e-3, 1e-3});
  int invalid = 0;
  for (int i = 0; i < 50; ++i) {
    const ParamVector before = s.theta;
    const StepOutcome out = sampler_step(s, *nl, d, cfg, rngs);
    if (out.proposed[0] <= 0.0 || out.proposed[1] <= 0.0) {
      ++invalid;
      CHECK(out.log_r == -INFINITY);
      CHECK_FALSE(out.accepted);
      CHECK(s.theta == before);
    }
  }
  CHECK(invalid > 0);
}

TEST_CASE("marginal MH recovers the analytic posterior") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 200, 7, 0.5);
  const auto post = m->posterior(d);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::marginal_mh;
  cfg.rw = RwProposal({std::sqrt(post.var)});
  ChainRngs rngs = ChainRngs::from_seed(8);
  const ChainTrace tr = run_chain(*m, d, cfg, {100000, 1000, 0}, initial_state(*m, d, cfg, rngs, ParamVector{post.mean}), rngs);
  const auto rep = summarize(tr);
  const double se = rep.sd[0] * std::sqrt(rep.iac[0] / static_cast<double>(rep.n_samples));
  CHECK(std::abs(rep.mean[0] - post.mean) < 3.0 * se);
  CHECK(std::abs(rep.sd[0] / std::sqrt(post.var) - 1.0) < 0.05);
}

TEST_CASE("pmmh_step: cached estimate is never refreshed") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 20, 3);
  ChainRngs rngs = ChainRngs::from_seed(9);
  const SmcConfig smc{20, nullptr};
  ChainState s{{0.0}, std::nullopt, 0.0, 0};
  // theta' = theta: log_r is the fresh estimate minus the cache, not zero.
  const StepOutcome out = pmmh_step(s, *m, d, kFrozen, smc, rngs);
  CHECK(std::abs(out.proposed[0]) < 1e-250);
  CHECK(out.log_r != 0.0);
  CHECK(std::isfinite(out.log_r));

  ChainState bad{{0.0}, std::nullopt, std::nullopt, 0};
  CHECK_THROWS_AS(pmmh_step(bad, *m, d, kFrozen, smc, rngs), std::invalid_argument);
}

TEST_CASE("property: PMMH cache changes only at acceptance") {
  const auto m = iid_gaussian_model(0.1, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 40, 4);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::pmmh;
  cfg.particles = 30;
  cfg.rw = RwProposal({0.15});
  ChainRngs rngs = ChainRngs::from_seed(10);
  ChainState s = initial_state(*m, d, cfg, rngs, ParamVector{0.0});
  int acc = 0;
  for (int i = 0; i < 200; ++i) {
    const ChainState before = s;
    const StepOutcome out = sampler_step(s, *m, d, cfg, rngs);
    if (out.accepted) {
      ++acc;
    } else {
      CHECK(s.theta == before.theta);
      CHECK(*s.cached_loglike == *before.cached_loglike);
    }
  }
  CHECK(acc > 0);
}

TEST_CASE("PMMH acceptance approaches marginal MH for large N on a shared proposal stream") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 30, 11);
  const auto post = m->posterior(d);
  const RwProposal rw({2.0 * std::sqrt(post.var)});
  SamplerConfig mh;
  mh.kind = SamplerKind::marginal_mh;
  mh.rw = rw;
  SamplerConfig pm = mh;
  pm.kind = SamplerKind::pmmh;
  pm.particles = 5000;
  pm.proposal = std::make_shared<IidAdaptedProposal>(2.0);
  const RunOptions opts{1500, 100, 0};
  ChainRngs r1 = ChainRngs::from_seed(12), r2 = ChainRngs::from_seed(12);
  const ChainTrace a = run_chain(*m, d, mh, opts, initial_state(*m, d, mh, r1, ParamVector{post.mean}), r1);
  const ChainTrace b = run_chain(*m, d, pm, opts, initial_state(*m, d, pm, r2, ParamVector{post.mean}), r2);
  CHECK(std::abs(a.acceptance_rate() - b.acceptance_rate()) < 0.02);
}

TEST_CASE("PMMH recovers the analytic posterior") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 100, 13);
  const auto post = m->posterior(d);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::pmmh;
  cfg.particles = 100;
  cfg.proposal = std::make_shared<IidAdaptedProposal>(2.0);
  cfg.rw = RwProposal({std::sqrt(post.var)});
  ChainRngs rngs = ChainRngs::from_seed(14);
  const ChainTrace tr = run_chain(*m, d, cfg, {22000, 2000, 0}, initial_state(*m, d, cfg, rngs, ParamVector{post.mean}), rngs);
  const auto rep = summarize(tr);
  const double se = rep.sd[0] * std::sqrt(rep.iac[0] / static_cast<double>(rep.n_samples));
  CHECK(std::abs(rep.mean[0] - post.mean) < 4.0 * se);
  CHECK(std::abs(rep.sd[0] / std::sqrt(post.var) - 1.0) < 0.1);
}

TEST_CASE("mcmc_ais_step: forced theta' = theta always accepts with log_r = 0") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 15, 15);
  ChainRngs rngs = ChainRngs::from_seed(16);
  BridgeConfig bridge;
  bridge.particles = 10;
  ChainState s{{0.2}, m->sample_conditional_path(0.2, d, rngs.kernel), std::nullopt, 0};
  for (int i = 0; i < 20; ++i) {
    const LatentPath before = *s.latent;
    const StepOutcome out = mcmc_ais_step(s, *m, d, kFrozen, bridge, rngs);
    CHECK(out.log_r == 0.0);
    CHECK(out.accepted);
    CHECK(s.latent->length() == before.length());
  }
  bridge.intermediate_steps = 0;
  CHECK_THROWS_AS(mcmc_ais_step(s, *m, d, kFrozen, bridge, rngs), std::invalid_argument);
}

TEST_CASE("property: MCMC-AIS log_r reassembles from prior, proposal and stage terms") {
  const auto nl = nonlinear_benchmark_model();
  RngStream sim(2);
  const Dataset d = simulate(*nl, ParamVector{10.0, 1.0}, 20, sim);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::mcmc_ais;
  cfg.intermediate_steps = 3;
  cfg.particles = 15;
  cfg.rw = RwProposal({0.3, 0.1}, RwScale::sqrt);
  ChainRngs rngs = ChainRngs::from_seed(17);
  ChainState s = initial_state(*nl, d, cfg, rngs, ParamVector{10.0, 1.0});
  for (int i = 0; i < 60; ++i) {
    const ChainState before = s;
    const StepOutcome out = sampler_step(s, *nl, d, cfg, rngs);
    if (out.stage_increments.empty()) {
      CHECK(out.log_r == -INFINITY);
    } else {
      double sum = out.log_prior_proposal;
      for (double v : out.stage_increments) sum += v;
      CHECK(out.log_r == doctest::Approx(sum).epsilon(1e-15));
    }
    if (!out.accepted) {
      CHECK(s.theta == before.theta);
      CHECK(*s.latent == *before.latent);
    }
  }
}

TEST_CASE("mwpg_step: theta-update ratio is the joint density difference") {
  const auto m = iid_gaussian_model(0.4, 1.0, 0.05, 0.0, 1e5);
  const Dataset d = iid_data(*m, 25, 18);
  ChainRngs rngs = ChainRngs::from_seed(19);
  const CsmcConfig csmc{10, true, nullptr};
  ChainState s{{0.1}, m->sample_conditional_path(0.1, d, rngs.kernel), std::nullopt, 0};

  const StepOutcome same = mwpg_step(s, *m, d, kFrozen, csmc, rngs);
  CHECK(same.log_r == 0.0);
  CHECK(same.accepted);

  for (int i = 0; i < 10; ++i) {
    const ChainState before = s;
    const StepOutcome out = mwpg_step(s, *m, d, RwProposal({0.05}), csmc, rngs);
    const double expect = sum_joint_diff(*m, before.theta[0], out.proposed[0], *before.latent, d) +
                          m->prior_logdensity(out.proposed) - m->prior_logdensity(before.theta);
    CHECK(out.log_r == doctest::Approx(expect).epsilon(1e-10));
    if (!out.accepted) CHECK(s.theta == before.theta);
  }
}

TEST_CASE("run_chain: length, determinism and error context") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 10, 20);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::mwpg;
  cfg.particles = 8;
  cfg.rw = RwProposal({0.1});
  ChainRngs r = ChainRngs::from_seed(21);
  const ChainState init = initial_state(*m, d, cfg, r, ParamVector{0.0});
  CHECK(run_chain(*m, d, cfg, {1, 0, 0}, init, r).iterations() == 1);

  const ChainTrace a = run_chain(*m, d, cfg, {300, 30, 50}, init, r);
  const ChainTrace b = run_chain(*m, d, cfg, {300, 30, 50}, init, r);
  CHECK(a.theta == b.theta);
  CHECK(a.log_r == b.log_r);
  CHECK(a.accepted == b.accepted);
  CHECK(a.latent_snapshots.size() == 6);
  CHECK(a.fingerprint == cfg.fingerprint());
  for (double lr : a.log_r) CHECK((std::isfinite(lr) || lr == -INFINITY));

  CHECK_THROWS_AS(run_chain(*m, d, cfg, {10, 10, 0}, init, r), std::invalid_argument);
  SamplerConfig pm = cfg;
  pm.kind = SamplerKind::pmmh;
  try {
    run_chain(*m, d, pm, {5, 0, 0}, ChainState{{0.0}, std::nullopt, std::nullopt, 0}, r);
    FAIL("expected ChainError");
  } catch (const ChainError& e) {
    CHECK(e.iteration() == 0);
  }
}

TEST_CASE("paired proposal streams give identical theta increments across samplers") {
  const auto m = iid_gaussian_model(0.1, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 30, 22);
  SamplerConfig mh;
  mh.kind = SamplerKind::marginal_mh;
  mh.rw = RwProposal({0.1});
  SamplerConfig ais = mh;
  ais.kind = SamplerKind::mcmc_ais;
  ais.particles = 10;
  ChainRngs r1{RngStream(5), RngStream(6), 0}, r2{RngStream(5), RngStream(7), 0};
  const ChainTrace a = run_chain(*m, d, mh, {200, 0, 0}, initial_state(*m, d, mh, r1, ParamVector{0.0}), r1);
  const ChainTrace b = run_chain(*m, d, ais, {200, 0, 0}, initial_state(*m, d, ais, r2, ParamVector{0.0}), r2);
  CHECK(a.increment == b.increment);
}

TEST_CASE("sampler kinds round-trip through their names") {
  for (SamplerKind k : {SamplerKind::marginal_mh, SamplerKind::pmmh, SamplerKind::mcmc_ais, SamplerKind::mwpg}) {
    CHECK(sampler_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(sampler_kind_from_string("gibbs"), DomainError);
}

// Stationary pairs (theta, x) ~ pi pushed through one MCMC-AIS step, with the
// state space coarsened to the four sign cells of (theta - mean, x - mean):
// reversibility means the empirical flow matrix is symmetric.
TEST_CASE("property: MCMC-AIS K=1 is reversible on a coarsened T=1 toy") {
  const auto m = iid_gaussian_model(0.5, 1.0, 0.5, 0.0, 1.0);
  Dataset d;
  d.y = {0.8};
  const auto post = m->posterior(d);
  BridgeConfig bridge;
  bridge.particles = 3;
  const RwProposal rw({1.0});
  auto cell = [&](double th, double x) {
    const double xm = m->conditional(post.mean, 0.8).mean;
    return (th > post.mean ? 2 : 0) + (x > xm ? 1 : 0);
  };
  double flow[4][4] = {};
  RngStream root(23);
  const int reps = 40000;
  for (int r = 0; r < reps; ++r) {
    RngStream seed = root.derive(static_cast<std::uint64_t>(r));
    ChainRngs rngs{seed.derive(1), seed.derive(2), 0};
    const double th = rngs.kernel.normal(post.mean, std::sqrt(post.var));
    ChainState s{{th}, m->sample_conditional_path(th, d, rngs.kernel), std::nullopt, 0};
    const int from = cell(th, s.latent->state(0)[0]);
    mcmc_ais_step(s, *m, d, rw, bridge, rngs);
    flow[from][cell(s.theta[0], s.latent->state(0)[0])] += 1.0;
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double tol = 4.0 * std::sqrt(flow[i][j] + flow[j][i] + 1.0);
      CHECK(std::abs(flow[i][j] - flow[j][i]) < tol);
    }
  }
}

TEST_CASE("SPSA: gradient vanishes at the sample mean") {
  const auto m = iid_gaussian_model(0.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 100, 24, 0.3);
  double ybar = 0.0;
  for (double y : d.y) ybar += y;
  ybar /= 100.0;
  BridgeConfig bridge;
  bridge.particles = 30;
  bridge.proposal = std::make_shared<IidAdaptedProposal>(2.0);
  RngStream rng(25);
  const SpsaEstimate est = spsa_gradient_estimate(*m, d, ParamVector{ybar}, ParamVector{0.01}, bridge, 300, rng);
  CHECK(std::abs(est.gradient[0]) < 3.0 * est.std_error[0]);
  CHECK(est.log_ratios.size() == 300);
  CHECK_THROWS_AS(spsa_gradient_estimate(*m, d, ParamVector{ybar}, ParamVector{0.0}, bridge, 10, rng), DomainError);
}

TEST_CASE("SPSA: matches the closed-form score at a generic theta") {
  const auto m = iid_gaussian_model(0.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 100, 26, 0.0);
  BridgeConfig bridge;
  bridge.particles = 30;
  bridge.proposal = std::make_shared<IidAdaptedProposal>(2.0);
  RngStream rng(27);
  const SpsaEstimate est = spsa_gradient_estimate(*m, d, ParamVector{0.2}, ParamVector{0.01}, bridge, 300, rng);
  CHECK(std::abs(est.gradient[0] - m->score(0.2, d)) < 3.0 * est.std_error[0]);
}

TEST_CASE("SPSA oracle mode is the exact central difference") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 40, 28);
  const double h = 0.01, th = 0.4;
  const double cd = (m->log_likelihood(ParamVector{th + h}, d) - m->log_likelihood(ParamVector{th - h}, d)) / (2 * h);
  CHECK(spsa_exact_gradient(*m, d, ParamVector{th}, ParamVector{h})[0] == doctest::Approx(cd).epsilon(1e-14));
  // The log-likelihood is quadratic in theta, so the central difference is the score.
  CHECK(cd == doctest::Approx(m->score(th, d)).epsilon(1e-9));
}
