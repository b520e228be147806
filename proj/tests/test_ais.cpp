#include <doctest.h>

#include <cmath>
#include <vector>

#include "bridgemc/ais.hpp"
#include "bridgemc/errors.hpp"
#include "bridgemc/models.hpp"
#include "stats.hpp"

using namespace bridgemc;
using bridgemc::test::moments;

namespace {

Dataset iid_data(const IidGaussianModel& m, std::size_t T, std::uint64_t seed) {
  RngStream rng(seed);
  return simulate(m, ParamVector{0.0}, T, rng);
}

}  // namespace

TEST_CASE("AnnealingPath: schedule validation and stage parameters") {
  const AnnealingPath p = AnnealingPath::linear({0.0}, {1.0}, 3);
  CHECK(p.intermediate_steps() == 3);
  CHECK(p.level(0) == 0.0);
  CHECK(p.level(4) == 1.0);
  CHECK(p.stage_parameter(2)[0] == doctest::Approx(0.5));
  CHECK(p.stage_parameter(4)[0] == 1.0);
  CHECK_THROWS_AS(AnnealingPath::with_schedule({0.0}, {1.0}, {0.0, 0.6, 0.4, 1.0}), DomainError);
  CHECK_THROWS_AS(AnnealingPath::with_schedule({0.0}, {1.0}, {0.1, 1.0}), DomainError);
  CHECK_THROWS_AS(AnnealingPath::linear({0.0}, {1.0, 2.0}, 1), DomainError);
  const auto nl = nonlinear_benchmark_model();
  CHECK_THROWS_AS(AnnealingPath::linear({1.0, 1.0}, {-1.0, 1.0}, 1).validate(*nl), DomainError);
}

TEST_CASE("intermediate_logdensity: endpoints and midpoint") {
  const auto m = iid_gaussian_model(0.5, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 15, 3);
  RngStream rng(4);
  const LatentPath x = m->sample_conditional_path(0.0, d, rng);
  const AnnealingPath p = AnnealingPath::linear({-0.2}, {0.6}, 1);
  CHECK(intermediate_logdensity(p, 0, x, d, *m) == joint_logdensity(*m, ParamVector{-0.2}, x, d));
  CHECK(intermediate_logdensity(p, 2, x, d, *m) == joint_logdensity(*m, ParamVector{0.6}, x, d));
  CHECK(intermediate_logdensity(p, 1, x, d, *m) ==
        doctest::Approx(joint_logdensity(*m, ParamVector{0.2}, x, d)).epsilon(1e-13));

  const AnnealingPath g = AnnealingPath::linear({-0.2}, {0.6}, 1, PathKind::geometric);
  const double expect = 0.5 * joint_logdensity(*m, ParamVector{-0.2}, x, d) +
                        0.5 * joint_logdensity(*m, ParamVector{0.6}, x, d);
  CHECK(intermediate_logdensity(g, 1, x, d, *m) == doctest::Approx(expect).epsilon(1e-13));
  CHECK_THROWS_AS(intermediate_logdensity(p, 3, x, d, *m), std::out_of_range);
}

TEST_CASE("ais_csmc_run: trivial bridges") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 10, 5);
  RngStream rng(6);
  const LatentPath x0 = m->sample_conditional_path(0.1, d, rng);
  const StageKernel kern{8, true, nullptr};

  for (std::size_t K : {0u, 1u, 4u}) {
    const RatioEstimate same = ais_csmc_run(x0, AnnealingPath::linear({0.1}, {0.1}, K), *m, d, kern, rng);
    CHECK(same.log_value == 0.0);
    CHECK(same.increments.size() == K + 1);
  }
  const RatioEstimate k0 = ais_csmc_run(x0, AnnealingPath::linear({0.1}, {0.3}, 0), *m, d, kern, rng);
  CHECK(k0.final_path() == x0);
  CHECK(k0.log_value == doctest::Approx(joint_logdensity(*m, ParamVector{0.3}, x0, d) -
                                        joint_logdensity(*m, ParamVector{0.1}, x0, d)));
}

TEST_CASE("ais_csmc_run: geometric path cannot drive cSMC") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 5, 5);
  RngStream rng(1);
  const LatentPath x0 = m->sample_conditional_path(0.0, d, rng);
  CHECK_THROWS_AS(ais_csmc_run(x0, AnnealingPath::linear({0.0}, {0.1}, 1, PathKind::geometric), *m, d, StageKernel{}, rng),
                  UnsupportedOperation);
  CHECK_NOTHROW(ais_csmc_run(x0, AnnealingPath::linear({0.0}, {0.1}, 0, PathKind::geometric), *m, d, StageKernel{}, rng));
}

TEST_CASE("property: telescoping and endpoint identities on random paths") {
  const auto m = nonlinear_benchmark_model();
  RngStream sim(2);
  const Dataset d = simulate(*m, ParamVector{10.0, 1.0}, 25, sim);
  RngStream rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const ParamVector a{5.0 + rng.uniform() * 10.0, 0.5 + rng.uniform()};
    const ParamVector b{5.0 + rng.uniform() * 10.0, 0.5 + rng.uniform()};
    const AnnealingPath p = AnnealingPath::linear(a, b, 3);
    const LatentPath x0 = *d.x_true;
    const RatioEstimate est = ais_csmc_run(x0, p, *m, d, StageKernel{20, true, nullptr}, rng);
    double sum = 0.0;
    for (std::size_t k = 0; k < est.stage_paths.size(); ++k) {
      sum += intermediate_logdensity(p, k + 1, est.stage_paths[k], d, *m) -
             intermediate_logdensity(p, k, est.stage_paths[k], d, *m);
    }
    CHECK(sum == est.log_value);
    const LatentPath& u = est.final_path();
    CHECK(intermediate_logdensity(p, 0, u, d, *m) == joint_logdensity(*m, a, u, d));
    CHECK(intermediate_logdensity(p, 4, u, d, *m) == joint_logdensity(*m, b, u, d));
  }
}

TEST_CASE("property: reversed bridge has mirrored stage densities") {
  const auto m = iid_gaussian_model(0.3, 1.0, 0.1, 0.0, 10.0);
  const Dataset d = iid_data(*m, 8, 7);
  RngStream rng(8);
  for (std::size_t K : {1u, 2u, 5u}) {
    const AnnealingPath fwd = AnnealingPath::linear({-0.4}, {0.9}, K);
    const AnnealingPath bwd = AnnealingPath::linear({0.9}, {-0.4}, K);
    const LatentPath x = m->sample_conditional_path(rng.normal(), d, rng);
    for (std::size_t k = 0; k <= K + 1; ++k) {
      CHECK(intermediate_logdensity(fwd, k, x, d, *m) ==
            doctest::Approx(intermediate_logdensity(bwd, K + 1 - k, x, d, *m)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ais_csmc_run: unbiased ratio for K = 1") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 20, 10);
  const double th = 0.0, th2 = 0.15;
  const double exact = m->log_likelihood(ParamVector{th2}, d) - m->log_likelihood(ParamVector{th}, d);
  RngStream root(12);
  std::vector<double> w;
  for (int r = 0; r < 2000; ++r) {
    RngStream rng = root.derive(static_cast<std::uint64_t>(r));
    const LatentPath x0 = m->sample_conditional_path(th, d, rng);
    w.push_back(std::exp(ais_csmc_run(x0, AnnealingPath::linear({th}, {th2}, 1), *m, d, StageKernel{50, true, nullptr}, rng).log_value - exact));
  }
  const auto mo = moments(w);
  CHECK(std::abs(mo.mean - 1.0) < 3.0 * mo.se);
}

TEST_CASE("ratio variance grows with bridge distance") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const std::size_t T = 100;
  const Dataset d = iid_data(*m, T, 13);
  const double s = 1.0 / std::sqrt(static_cast<double>(T));
  const std::vector<ParamVector> dirs{{0.0}, {0.01 * s}, {0.1 * s}, {1.0 * s}};
  RngStream rng(14);
  const auto rows = ratio_variance_vs_distance(*m, d, ParamVector{0.0}, dirs, 1, StageKernel{20, true, nullptr}, 2000, rng);
  CHECK(rows[0].variance == 0.0);
  std::vector<double> v, se;
  for (std::size_t j = 1; j < rows.size(); ++j) {
    v.push_back(rows[j].variance);
    se.push_back(rows[j].std_error);
  }
  CHECK(v[0] < v[1]);
  CHECK(v[1] < v[2]);
  CHECK(increasing_within_noise(v, se));
}

TEST_CASE("doubling K does not increase ratio variance") {
  const auto m = iid_gaussian_model(1.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 50, 15);
  const std::vector<ParamVector> dirs{{0.3}};
  RngStream r1(16), r2(16);
  const auto k2 = ratio_variance_vs_distance(*m, d, ParamVector{0.0}, dirs, 2, StageKernel{20, true, nullptr}, 1500, r1);
  const auto k4 = ratio_variance_vs_distance(*m, d, ParamVector{0.0}, dirs, 4, StageKernel{20, true, nullptr}, 1500, r2);
  CHECK(k4[0].variance <= k2[0].variance + 2.0 * std::hypot(k2[0].std_error, k4[0].std_error));
}

// x0 fed from P stage-0 sweeps started far from the posterior: the bias in
// exp(log L-hat) is gross at P = 0 and gone after enough sweeps.
TEST_CASE("property: warm-start sweeps control bias") {
  const auto m = iid_gaussian_model(0.0, 1.0, 0.01, 0.0, 1e5);
  const Dataset d = iid_data(*m, 10, 17);
  const double th = 0.0, th2 = 0.3;
  const double exact = m->log_likelihood(ParamVector{th2}, d) - m->log_likelihood(ParamVector{th}, d);
  LatentPath far(10, 1);
  for (double& v : far.values()) v = 3.0;
  const StageKernel kern{10, true, nullptr};
  std::vector<double> bias, se;
  for (std::size_t P : {0u, 5u, 50u}) {
    RngStream root(18);
    std::vector<double> w;
    for (int r = 0; r < 1500; ++r) {
      RngStream rng = root.derive(static_cast<std::uint64_t>(r));
      const LatentPath x0 = warm_start(far, *m, ParamVector{th}, d, kern, P, rng);
      w.push_back(std::exp(ais_csmc_run(x0, AnnealingPath::linear({th}, {th2}, 1), *m, d, kern, rng).log_value - exact));
    }
    const auto mo = moments(w);
    bias.push_back(std::abs(mo.mean - 1.0));
    se.push_back(mo.se);
  }
  CHECK(bias[0] > 3.0 * se[0]);
  CHECK(bias[2] <= 3.0 * se[2]);
  CHECK(bias[2] < bias[0]);
}
