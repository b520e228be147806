#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bridgemc/errors.hpp"
#include "bridgemc/models.hpp"
#include "bridgemc/smc.hpp"
#include "stats.hpp"

using namespace bridgemc;
using bridgemc::test::moments;

namespace {

struct IidFixture {
  std::shared_ptr<const IidGaussianModel> model = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  Dataset data;
  explicit IidFixture(std::size_t T, std::uint64_t seed = 1, double a = 1.0) {
    model = iid_gaussian_model(a, 1.0, 0.01, 0.0, 1e5);
    RngStream rng(seed);
    data = simulate(*model, ParamVector{0.0}, T, rng);
  }
};

// Zero-weight proposal: its density is +inf everywhere, so every incremental
// weight is -inf.
class VoidProposal final : public Proposal {
 public:
  void sample_initial(const StateSpaceModel& m, ParamSpan th, const Dataset&, RngStream& rng,
                      std::span<double> out) const override {
    m.sample_init(th, rng, out);
  }
  double initial_logdensity(const StateSpaceModel&, ParamSpan, const Dataset&,
                            std::span<const double>) const override {
    return std::numeric_limits<double>::infinity();
  }
  void sample_next(const StateSpaceModel& m, ParamSpan th, const Dataset&, std::size_t t,
                   std::span<const double> prev, RngStream& rng,
                   std::span<double> out) const override {
    m.sample_trans(th, t, prev, rng, out);
  }
  double next_logdensity(const StateSpaceModel&, ParamSpan, const Dataset&, std::size_t,
                         std::span<const double>, std::span<const double>) const override {
    return std::numeric_limits<double>::infinity();
  }
};

}  // namespace

TEST_CASE("smc_run: a single particle has trivial ancestry") {
  IidFixture f(6);
  RngStream rng(3);
  const ParticleSystem ps = smc_run(*f.model, ParamVector{0.1}, f.data, *bootstrap_proposal(), 1, rng);
  for (std::size_t t = 1; t < ps.length(); ++t) CHECK(ps.ancestor(t, 0) == 0);
}

TEST_CASE("smc_run: bootstrap weights are the observation density") {
  IidFixture f(5, 2, 0.7);
  RngStream rng(4);
  const double th = 0.25;
  const ParticleSystem ps = smc_run(*f.model, ParamVector{th}, f.data, *bootstrap_proposal(), 7, rng);
  for (std::size_t t = 0; t < ps.length(); ++t) {
    for (std::size_t i = 0; i < 7; ++i) {
      const double z = ps.state(t, i)[0];
      const double r = f.data.y[t] - 0.7 * th - z;
      CHECK(ps.log_weight(t, i) == doctest::Approx(-0.5 * std::log(2 * M_PI * 0.01) - 0.5 * r * r / 0.01).epsilon(1e-12));
    }
  }
}

TEST_CASE("smc_run: same seed gives identical ancestry") {
  IidFixture f(3);
  RngStream a(99), b(99);
  const ParticleSystem p1 = smc_run(*f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), 4, a);
  const ParticleSystem p2 = smc_run(*f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), 4, b);
  for (std::size_t t = 1; t < 3; ++t) {
    for (std::size_t i = 0; i < 4; ++i) CHECK(p1.ancestor(t, i) == p2.ancestor(t, i));
  }
}

TEST_CASE("smc_run: all weights zero raises with the failing time") {
  IidFixture f(4);
  RngStream rng(1);
  VoidProposal vp;
  try {
    smc_run(*f.model, ParamVector{0.0}, f.data, vp, 5, rng);
    FAIL("expected DegenerateWeightsError");
  } catch (const DegenerateWeightsError& e) {
    CHECK(e.time_index() == 0);
  }
  CHECK_THROWS_AS(smc_run(*f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), 0, rng),
                  std::invalid_argument);
}

TEST_CASE("log_likelihood_estimate: boundary cases") {
  ParticleSystem one(1, 1, 1);
  one.log_weight(0, 0) = -2.5;
  CHECK(log_likelihood_estimate(one).value == -2.5);

  ParticleSystem flat(3, 4, 1);
  CHECK(log_likelihood_estimate(flat).value == 0.0);

  ParticleSystem dead(2, 2, 1);
  dead.log_weight(1, 0) = dead.log_weight(1, 1) = -INFINITY;
  const auto est = log_likelihood_estimate(dead);
  CHECK(est.degenerate);
  CHECK(est.value == -INFINITY);
}

TEST_CASE("log_mean_exp is stable at large magnitudes") {
  const std::vector<double> v{1000.0, 1000.0 + std::log(3.0)};
  CHECK(log_mean_exp(v) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
  const std::vector<double> w{-INFINITY, 0.0};
  CHECK(log_mean_exp(w) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("categorical sampler: probabilities and zero mass") {
  CategoricalSampler cat;
  const std::vector<double> lw{std::log(1.0), -INFINITY, std::log(3.0)};
  REQUIRE(cat.reset(lw));
  const auto p = cat.probabilities();
  CHECK(p[0] == doctest::Approx(0.25));
  CHECK(p[1] == 0.0);
  CHECK(p[2] == doctest::Approx(0.75));
  RngStream rng(5);
  for (int i = 0; i < 1000; ++i) CHECK(cat.draw(rng) != 1);
  const std::vector<double> none{-INFINITY, -INFINITY};
  CHECK_FALSE(cat.reset(none));
}

TEST_CASE("likelihood estimate: unbiased and relative sd grows slowly with T") {
  IidAdaptedProposal prop(2.0);
  std::vector<double> rel_sd;
  for (std::size_t T : {10u, 40u, 160u}) {
    IidFixture f(T, 6);
    const double exact = f.model->log_likelihood(ParamVector{0.0}, f.data);
    std::vector<double> ratios;
    RngStream root(17);
    for (int r = 0; r < 400; ++r) {
      RngStream rng = root.derive(static_cast<std::uint64_t>(r));
      const auto ps = smc_run(*f.model, ParamVector{0.0}, f.data, prop, 100, rng);
      ratios.push_back(std::exp(log_likelihood_estimate(ps).value - exact));
    }
    const auto mo = moments(ratios);
    CHECK(std::abs(mo.mean - 1.0) < 3.0 * mo.se);
    rel_sd.push_back(std::sqrt(mo.var) / mo.mean);
  }
  // sqrt(T) scaling allows a factor 4 between T=10 and T=160; grant 2x slack.
  CHECK(rel_sd[2] < 8.0 * rel_sd[0]);
}

TEST_CASE("csmc_run: one particle returns the reference") {
  IidFixture f(8);
  RngStream rng(2);
  const LatentPath ref = f.model->sample_conditional_path(0.0, f.data, rng);
  for (bool bs : {false, true}) {
    CHECK(csmc_run(bs, *f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), 1, ref, rng) == ref);
  }
}

TEST_CASE("csmc_run: pinned particle and ancestral validity") {
  const auto m = nonlinear_benchmark_model();
  RngStream sim(5);
  const Dataset d = simulate(*m, ParamVector{10.0, 1.0}, 30, sim);
  RngStream rng(8);
  const LatentPath ref = *d.x_true;
  for (bool bs : {false, true}) {
    const CsmcResult r = csmc_run_detailed(bs, *m, ParamVector{10.0, 1.0}, d, *bootstrap_proposal(), 16, ref, rng);
    for (std::size_t t = 0; t < 30; ++t) {
      CHECK(r.particles.state(t, 0)[0] == ref.state(t)[0]);
      CHECK(r.path.state(t)[0] == r.particles.state(t, r.indices[t])[0]);
      if (t > 0) CHECK(r.particles.ancestor(t, 0) == 0);
    }
    if (!bs) {
      for (std::size_t t = 0; t + 1 < 30; ++t) {
        CHECK(r.indices[t] == r.particles.ancestor(t + 1, r.indices[t + 1]));
      }
    }
  }
}

TEST_CASE("csmc_run: mismatched reference is rejected") {
  IidFixture f(5);
  RngStream rng(1);
  CHECK_THROWS_AS(csmc_run(true, *f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), 4, LatentPath(3, 1), rng),
                  std::invalid_argument);
}

// For the iid model the backward kernel at t is P(w_t): compare observed
// index frequencies at t = 0 with the normalized weights of each run.
TEST_CASE("csmc_run: iid backward sampling draws from normalized weights") {
  IidFixture f(2, 3, 0.5);
  RngStream root(31);
  const LatentPath ref = f.model->sample_conditional_path(0.0, f.data, root);
  constexpr std::size_t N = 3;
  std::vector<double> diff[N];
  for (int r = 0; r < 20000; ++r) {
    RngStream rng = root.derive(static_cast<std::uint64_t>(r));
    const CsmcResult res = csmc_run_detailed(true, *f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), N, ref, rng);
    CategoricalSampler cat;
    cat.reset(res.particles.log_weights(0));
    const auto p = cat.probabilities();
    for (std::size_t i = 0; i < N; ++i) diff[i].push_back((res.indices[0] == i ? 1.0 : 0.0) - p[i]);
  }
  for (std::size_t i = 0; i < N; ++i) {
    const auto mo = moments(diff[i]);
    CHECK(std::abs(mo.mean) < 4.0 * mo.se);
  }
}

TEST_CASE("property: cSMC leaves the exact conditional invariant") {
  IidFixture f(3, 4, 0.5);
  const auto cond = f.model->conditional(0.2, f.data.y[0]);
  for (bool bs : {false, true}) {
    for (std::size_t N : {2u, 5u}) {
      std::vector<double> x1;
      RngStream root(40 + N + (bs ? 100 : 0));
      for (int r = 0; r < 8000; ++r) {
        RngStream rng = root.derive(static_cast<std::uint64_t>(r));
        const LatentPath x0 = f.model->sample_conditional_path(0.2, f.data, rng);
        x1.push_back(csmc_run(bs, *f.model, ParamVector{0.2}, f.data, *bootstrap_proposal(), N, x0, rng).state(0)[0]);
      }
      const auto mo = moments(x1);
      CHECK(std::abs(mo.mean - cond.mean) < 4.0 * mo.se);
      CHECK(std::abs(mo.var - cond.var) < 4.0 * test::variance_se(cond.var, x1.size()));
    }
  }
}

TEST_CASE("property: a long cSMC chain keeps time-averaged moments") {
  IidFixture f(4, 9, 0.5);
  const auto cond = f.model->conditional(0.0, f.data.y[0]);
  RngStream rng(50);
  LatentPath x = f.model->sample_conditional_path(0.0, f.data, rng);
  std::vector<double> x1;
  for (int i = 0; i < 1000; ++i) {
    x = csmc_run(true, *f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), 10, x, rng);
    x1.push_back(x.state(0)[0]);
  }
  const auto mo = moments(x1);
  // Successive states are correlated; allow a generous 6 iid standard errors.
  CHECK(std::abs(mo.mean - cond.mean) < 6.0 * mo.se);
  CHECK(std::abs(mo.var / cond.var - 1.0) < 0.2);
}

TEST_CASE("property: output law does not depend on which seeds drive particles 2..N") {
  IidFixture f(3, 12, 0.5);
  std::vector<double> a, b;
  RngStream r1(1000), r2(2000);
  for (int r = 0; r < 6000; ++r) {
    for (auto* pair : {&r1, &r2}) {
      RngStream rng = pair->derive(static_cast<std::uint64_t>(r));
      const LatentPath x0 = f.model->sample_conditional_path(0.0, f.data, rng);
      const double v = csmc_run(false, *f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), 4, x0, rng).state(1)[0];
      (pair == &r1 ? a : b).push_back(v);
    }
  }
  const auto ma = moments(a), mb = moments(b);
  CHECK(std::abs(ma.mean - mb.mean) < 4.0 * std::hypot(ma.se, mb.se));
}

TEST_CASE("draw_reference_path returns a full-length path") {
  IidFixture f(20);
  RngStream rng(3);
  const LatentPath p = draw_reference_path(*f.model, ParamVector{0.0}, f.data, *bootstrap_proposal(), 10, 2, rng);
  CHECK(p.length() == 20);
}

TEST_CASE("IidAdaptedProposal with inflation 1 gives constant weights") {
  IidFixture f(5, 2, 0.3);
  IidAdaptedProposal exact(1.0);
  RngStream rng(6);
  const ParticleSystem ps = smc_run(*f.model, ParamVector{0.1}, f.data, exact, 6, rng);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t i = 1; i < 6; ++i) {
      CHECK(ps.log_weight(t, i) == doctest::Approx(ps.log_weight(t, 0)).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(IidAdaptedProposal(0.0), DomainError);
  const auto nl = nonlinear_benchmark_model();
  std::vector<double> out(1);
  CHECK_THROWS_AS(exact.sample_initial(*nl, ParamVector{1.0, 1.0}, f.data, rng, out), UnsupportedOperation);
}
