#include <doctest.h>

#include <cmath>

#include "emach/baselines.hpp"
#include "emach/bench.hpp"
#include "emach/sampler.hpp"
#include "support/oracles.hpp"

using namespace emach;
using doctest::Approx;

namespace {

double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

TEST_CASE("hopfield solution") {
    SUBCASE("single repeated configuration gives +-1 entries") {
        const auto config = oracle::config_from_bits(5, 0b01101);
        const ObservationEnsemble ensemble(5, {{config, 9}});
        const auto params = hopfield_solution(ensemble);
        for (int i = 0; i < 5; ++i) CHECK(params.field(i) == config.spin(i));
        CHECK(params.coupling(0, 1) == config.spin(0) * config.spin(1));
        CHECK(params.w.cwiseAbs().maxCoeff() == 1.0);
    }
    SUBCASE("uniform synthetic ensemble gives zero") {
        std::vector<std::pair<SpinConfiguration, long>> counted;
        for (std::uint64_t bits = 0; bits < 8; ++bits) {
            counted.emplace_back(oracle::config_from_bits(3, bits), 2);
        }
        const auto params = hopfield_solution(ObservationEnsemble(3, std::move(counted)));
        CHECK(params.w.isZero(1e-15));
    }
    SUBCASE("entries stay in [-1, 1]") {
        const auto ensemble = oracle::random_ensemble(9, 50, 12, 31);
        const auto params = hopfield_solution(ensemble);
        CHECK(params.w.maxCoeff() <= 1.0);
        CHECK(params.w.minCoeff() >= -1.0);
    }
}

TEST_CASE("mle gradient matches finite differences") {
    const auto ensemble = oracle::random_ensemble(8, 40, 8, 41);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto params = oracle::random_params(8, 0.6, 500 + seed);
        const auto analytic = mle_gradient(params, ensemble);
        const auto numeric = oracle::finite_difference_gradient(
            [&](const Eigen::VectorXd& w) {
                return mle_log_likelihood(ParameterVector{8, w}, ensemble);
            },
            params.w);
        for (long i = 0; i < analytic.size(); ++i) {
            CHECK(relative_gap(analytic[i], numeric[i]) < 1e-6);
        }
    }
}

TEST_CASE("mle fit") {
    SUBCASE("recovers the truth from abundant exact samples") {
        const auto truth = draw_true_parameters({5, 0.2, 0.5, 51});
        SamplerConfig sampler{.num_samples = 1000000,
                              .method = SampleMethod::kExactEnumeration, .seed = 52};
        const auto ensemble = sample_exact(truth, sampler);
        const auto report = mle_fit(ensemble, {});
        CHECK(report.converged);
        CHECK(mse(report.params, truth) < 1e-3);
    }
    SUBCASE("gradient vanishes at the optimum and the ascent is monotone") {
        // Model-sampled data keeps the optimum interior (arbitrary random
        // ensembles can push the mle to infinity).
        const auto truth = draw_true_parameters({6, 0.2, 0.8, 53});
        SamplerConfig sampler{.num_samples = 5000,
                              .method = SampleMethod::kExactEnumeration, .seed = 54};
        const auto ensemble = sample_exact(truth, sampler);
        MleConfig config{.max_iters = 5000, .tol = 1e-8};
        const auto report = mle_fit(ensemble, config);
        CHECK(report.converged);
        CHECK(mle_gradient(report.params, ensemble).cwiseAbs().maxCoeff() < 1e-8);
        // The loop is deterministic, so capping iterations exposes prefixes
        // of one trajectory; the likelihood along it never decreases.
        double previous = -std::numeric_limits<double>::infinity();
        for (long cap : {1, 2, 4, 8, 16, 64}) {
            MleConfig prefix{.max_iters = cap, .tol = 1e-14};
            const double value =
                mle_log_likelihood(mle_fit(ensemble, prefix).params, ensemble);
            CHECK(value >= previous - 1e-12);
            previous = value;
        }
    }
    SUBCASE("cap enforced") {
        const auto ensemble = oracle::random_ensemble(10, 10, 2, 54);
        MleConfig config{.enumeration_cap = 8};
        CHECK_THROWS_WITH_AS(mle_fit(ensemble, config), doctest::Contains("intractable"),
                             std::invalid_argument);
    }
}

TEST_CASE("ple per-spin gradient matches finite differences") {
    const auto ensemble = oracle::random_ensemble(8, 35, 6, 61);
    Rng rng(62);
    for (int trial = 0; trial < 5; ++trial) {
        const int spin = static_cast<int>(rng.below(8));
        Eigen::VectorXd theta(8);
        for (int i = 0; i < 8; ++i) theta[i] = 1.2 * (2.0 * rng.uniform() - 1.0);
        const auto analytic = ple_spin_gradient(ensemble, spin, theta);
        const auto numeric = oracle::finite_difference_gradient(
            [&](const Eigen::VectorXd& t) { return ple_spin_objective(ensemble, spin, t); },
            theta);
        for (long i = 0; i < analytic.size(); ++i) {
            CHECK(relative_gap(analytic[i], numeric[i]) < 1e-6);
        }
    }
}

TEST_CASE("ple fit") {
    SUBCASE("two aligned configurations force a positive coupling") {
        const auto up = oracle::config_from_bits(2, 0b11);
        const auto down = oracle::config_from_bits(2, 0b00);
        const ObservationEnsemble ensemble(2, {{up, 50}, {down, 50}});
        const auto report = ple_fit(ensemble, {});
        CHECK(report.params.coupling(0, 1) > 0.5);
        CHECK(std::abs(report.params.field(0)) < 1e-6);
        CHECK(std::abs(report.params.field(1)) < 1e-6);
    }
    SUBCASE("per-spin problems are concave: optima agree across settings") {
        const auto truth = draw_true_parameters({7, 0.2, 0.6, 63});
        SamplerConfig sampler{.num_samples = 5000,
                              .method = SampleMethod::kExactEnumeration, .seed = 66};
        const auto ensemble = sample_exact(truth, sampler);
        PleConfig fine{.learning_rate = 0.1, .max_iters = 200000, .tol = 1e-8};
        PleConfig coarse{.learning_rate = 0.9, .max_iters = 200000, .tol = 1e-8};
        const auto a = ple_fit(ensemble, fine);
        const auto b = ple_fit(ensemble, coarse);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK((a.params.w - b.params.w).cwiseAbs().maxCoeff() < 1e-6);
    }
    SUBCASE("weak-coupling accuracy is comparable to exact mle") {
        const auto truth = draw_true_parameters({10, 0.1, 0.5, 64});
        SamplerConfig sampler{.num_samples = 100000,
                              .method = SampleMethod::kExactEnumeration, .seed = 65};
        const auto ensemble = sample_exact(truth, sampler);
        const auto mle_report = mle_fit(ensemble, {});
        const auto ple_report = ple_fit(ensemble, {});
        REQUIRE(mle_report.converged);
        const double mle_mse = mse(mle_report.params, truth);
        const double ple_mse = mse(ple_report.params, truth);
        CHECK(ple_mse < 2.0 * mle_mse);
    }
}

TEST_CASE("em, hopfield, mle, and ple report through the same structure") {
    const auto ensemble = oracle::random_ensemble(5, 12, 6, 71);
    const auto mle_report = mle_fit(ensemble, {});
    const auto ple_report = ple_fit(ensemble, {});
    CHECK(mle_report.method == "mle");
    CHECK(ple_report.method == "ple");
    CHECK(mle_report.params.num_spins == 5);
    CHECK(ple_report.params.num_spins == 5);
    CHECK(std::isfinite(mle_report.final_energy));
    CHECK(std::isfinite(ple_report.final_energy));
}
