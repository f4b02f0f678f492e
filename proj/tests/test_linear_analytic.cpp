#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "oracles.hpp"
#include "sdepca/linear_analytic.hpp"

using namespace sdepca;
using HP = boost::multiprecision::cpp_bin_float_50;

namespace {

const LinearAdditiveParams<double> kFig1{3.0, 1.0, 1.0};

// The closed forms written out directly in 50-digit arithmetic.
struct HighPrecisionLaw {
    HP mu, sigma, stationary;
};

HighPrecisionLaw high_precision_law(int theta1, int theta2) {
    const HP t1 = theta1, t2 = theta2;
    HighPrecisionLaw out;
    out.mu = t2 / t1 + (HP(1) - t2 / t1) * boost::multiprecision::exp(-t1);
    out.sigma = (HP(1) - boost::multiprecision::exp(HP(-2) * t1)) / (HP(2) * t1);
    out.stationary = out.sigma / (HP(1) - out.mu * out.mu);
    return out;
}

}  // namespace

TEST(Law, MatchesHighPrecisionOracle) {
    const auto hp = high_precision_law(3, 1);
    const LinearLaw<double> l = law(kFig1);
    EXPECT_NEAR(l.mu_one, hp.mu.convert_to<double>(), 1e-12);
    EXPECT_NEAR(l.sigma_one, hp.sigma.convert_to<double>(), 1e-12);
    ASSERT_TRUE(l.stationary_variance.has_value());
    EXPECT_NEAR(*l.stationary_variance, hp.stationary.convert_to<double>(), 1e-12);
    EXPECT_EQ(*l.stationary_mean, 0.0);
    EXPECT_NEAR(l.mu_one, 0.366525, 1e-6);
    EXPECT_NEAR(l.sigma_one, 0.166254, 1e-6);
    EXPECT_NEAR(*l.stationary_variance, 0.192054, 1e-6);
}

TEST(Law, TemplatedOnHighPrecisionScalar) {
    const LinearAdditiveParams<HP> p{HP(3), HP(1), HP(1)};
    const auto hp = high_precision_law(3, 1);
    const LinearLaw<HP> l = law(p);
    EXPECT_LT(boost::multiprecision::abs(l.mu_one - hp.mu).convert_to<double>(), 1e-40);
    EXPECT_LT(boost::multiprecision::abs(*l.stationary_variance - hp.stationary).convert_to<double>(), 1e-40);
}

TEST(Law, Degenerate) {
    const LinearLaw<double> boundary = law(LinearAdditiveParams<double>{2.0, 2.0, 1.0});
    EXPECT_EQ(boundary.mu_one, 1.0);
    EXPECT_FALSE(boundary.stationary_variance.has_value());
    EXPECT_FALSE(boundary.stationary_mean.has_value());
    EXPECT_NEAR(law(LinearAdditiveParams<double>{1.7, 0.0, 1.0}).mu_one, std::exp(-1.7), 1e-16);
    EXPECT_THROW(law(LinearAdditiveParams<double>{0.0, 1.0, 1.0}), ValidationError);
}

TEST(ExactMean, Examples) {
    const double mu = law(kFig1).mu_one;
    EXPECT_EQ(exact_mean(kFig1, 0.0), 1.0);
    for (int k = 0; k < 8; ++k) EXPECT_NEAR(exact_mean(kFig1, double(k)), std::pow(mu, k), 1e-15);
    EXPECT_NEAR(exact_mean(kFig1, 2.0), 0.134341, 1e-6);
    EXPECT_THROW(exact_mean(kFig1, -1.0), ValidationError);
}

TEST(ExactMean, DecaysToZero) { EXPECT_LT(std::abs(exact_mean(kFig1, 40.5)), 1e-15); }

TEST(ExactVariance, Examples) {
    const LinearLaw<double> l = law(kFig1);
    EXPECT_EQ(exact_variance(kFig1, 0.0), 0.0);
    EXPECT_NEAR(exact_variance(kFig1, 1.0), l.sigma_one, 1e-16);
    EXPECT_NEAR(exact_variance(kFig1, 200.0), *l.stationary_variance, 1e-15);
}

TEST(ExactVariance, IntegerRecursion) {
    const LinearLaw<double> l = law(kFig1);
    for (int k = 0; k < 30; ++k) {
        const double next = l.mu_one * l.mu_one * exact_variance(kFig1, double(k)) + l.sigma_one;
        EXPECT_NEAR(exact_variance(kFig1, double(k + 1)), next, 1e-15);
    }
}

TEST(ExactVariance, NonDecreasingOnFirstUnit) {
    oracle::Gen gen(9);
    for (int trial = 0; trial < 50; ++trial) {
        const LinearAdditiveParams<double> p{gen.uniform(0.1, 5), gen.uniform(-3, 3), gen.uniform(-2, 2)};
        double previous = -1.0;
        for (int i = 0; i <= 256; ++i) {
            const double v = exact_variance(p, i / 256.0);
            EXPECT_GE(v, previous);
            previous = v;
        }
    }
}

TEST(ExactVariance, IntegerSequenceConvergesMonotonically) {
    for (const auto& p : {kFig1, LinearAdditiveParams<double>{2.5, 1.0, 1.0}, LinearAdditiveParams<double>{2.5, -1.0, 1.0}}) {
        const double target = *law(p).stationary_variance;
        double gap = target - exact_variance(p, 0.0);
        for (int k = 1; k < 40; ++k) {
            const double now = target - exact_variance(p, double(k));
            EXPECT_GE(now, -1e-15);
            EXPECT_LE(now, gap + 1e-15);
            gap = now;
        }
        EXPECT_LT(gap, 1e-12);
    }
}

TEST(ExactVariance, HalfIntegerLimitDiffers) {
    const double integer_limit = exact_variance(kFig1, 60.0);
    const double half_limit = exact_variance(kFig1, 60.5);
    EXPECT_GT(std::abs(half_limit - integer_limit), 1e-3);
    EXPECT_LT(std::abs(exact_variance(kFig1, 61.5) - half_limit), 1e-12);
}

TEST(ExactVariance, LimitFormOnBoundary) {
    const LinearAdditiveParams<double> p{2.0, 2.0, 0.0};
    const double s1 = law(p).sigma_one;
    EXPECT_NEAR(exact_variance(p, 5.0), 5.0 * s1, 1e-14);
}

TEST(ExactVariance, MatchesMonteCarloAtFractionalTime) {
    // Quadrature samples at t = 2.5 (fine step 2^-10), independent of the closed form.
    std::vector<double> samples;
    for (std::uint64_t p = 0; p < 20000; ++p) {
        const BrownianGrid g = generate_path(77, p, 3.0, 0x1.0p-10, 1);
        samples.push_back(exact_sample_path(kFig1, g, 3).state(2 * 1024 + 512)[0]);
    }
    const auto m = oracle::sample_moments(samples);
    const double n = static_cast<double>(samples.size());
    const double var = exact_variance(kFig1, 2.5);
    EXPECT_NEAR(m.mean, exact_mean(kFig1, 2.5), 4.0 * std::sqrt(var / n));
    EXPECT_NEAR(m.variance, var, 4.0 * var * std::sqrt(2.0 / n) + 3.0 * 0x1.0p-10);
}

TEST(StationaryRegion, EndpointsAreUnitMultipliers) {
    oracle::Gen gen(10);
    for (int i = 0; i < 200; ++i) {
        const double t1 = gen.uniform(0.05, 10);
        const auto [lo, hi] = stationary_region(t1);
        EXPECT_NEAR(mean_multiplier(LinearAdditiveParams<double>{t1, lo, 0.0}, 1.0), -1.0, 1e-10);
        EXPECT_NEAR(mean_multiplier(LinearAdditiveParams<double>{t1, hi, 0.0}, 1.0), 1.0, 1e-12);
        const double inside = lo + (hi - lo) * gen.uniform(0.01, 0.99);
        EXPECT_LT(std::abs(mean_multiplier(LinearAdditiveParams<double>{t1, inside, 0.0}, 1.0)), 1.0);
    }
}

TEST(StationaryRegion, Examples) {
    EXPECT_TRUE(is_stationary(kFig1));
    EXPECT_TRUE(is_stationary(LinearAdditiveParams<double>{2.5, 1.0, 1.0}));
    EXPECT_TRUE(is_stationary(LinearAdditiveParams<double>{2.5, -1.0, 1.0}));
    EXPECT_FALSE(is_stationary(LinearAdditiveParams<double>{3.0, 3.0, 1.0}));
    EXPECT_THROW(stationary_region(0.0), ValidationError);
    const auto [lo, hi] = stationary_region(3.0);
    EXPECT_NEAR(lo, -3.0 * (1 + std::exp(-3.0)) / (1 - std::exp(-3.0)), 1e-15);
    EXPECT_EQ(hi, 3.0);
}

TEST(ExactSampleInteger, ZeroNoiseIsTheMean) {
    const std::vector<double> z(10, 0.0);
    const auto x = exact_sample_integer(kFig1, std::span<const double>(z));
    ASSERT_EQ(x.size(), 11);
    for (int k = 0; k <= 10; ++k) EXPECT_NEAR(x[k], exact_mean(kFig1, double(k)), 1e-16);
}

TEST(ExactSampleInteger, MonteCarloMoments) {
    const std::size_t n = 100000;
    std::vector<double> at5(n);
    for (std::size_t p = 0; p < n; ++p) at5[p] = exact_sample_integer(kFig1, 123, p, 5)[5];
    const auto m = oracle::sample_moments(at5);
    const double var = exact_variance(kFig1, 5.0);
    EXPECT_NEAR(m.mean, exact_mean(kFig1, 5.0), 4.0 * std::sqrt(var / n));
    EXPECT_NEAR(m.variance / var, 1.0, 0.05);
}

TEST(ExactSampleInteger, DeterministicAndTrajectoryForm) {
    const auto a = exact_sample_integer(kFig1, 5, 9, 6);
    const auto b = exact_sample_integer(kFig1, 5, 9, 6);
    EXPECT_TRUE(a == b);
    const auto traj = exact_integer_trajectory(kFig1, 5, 9, 6);
    EXPECT_EQ(traj.m, 1);
    EXPECT_EQ(traj.blocks(), 6);
    for (int k = 0; k <= 6; ++k) EXPECT_EQ(traj.anchor(k)[0], a[k]);
    EXPECT_THROW(exact_sample_integer(kFig1, 5, 9, -1), ValidationError);
}

TEST(ExactSamplePath, ZeroIncrementsFollowTheMean) {
    const BrownianGrid g(0x1.0p-7, 3.0, 0, 0, Eigen::MatrixXd::Zero(1, 3 * 128));
    const auto traj = exact_sample_path(kFig1, g, 3);
    for (Eigen::Index n = 0; n <= traj.steps(); ++n) {
        const double expect = exact_mean(kFig1, traj.time(n));
        EXPECT_NEAR(traj.state(n)[0], expect, 1e-15 * (1 + std::abs(expect)));
    }
}

TEST(ExactSamplePath, QuadratureVarianceWithinOrderStep) {
    // Var of Σ e^{-θ₁(1 - t_i)} ΔB_i is δ̄ Σ_{j=1..n} e^{-2θ₁ j δ̄}.
    const LinearAdditiveParams<double> ou{3.0, 0.0, 0.0};
    for (int k = 6; k <= 11; ++k) {
        const double h = std::ldexp(1.0, -k);
        const int n = 1 << k;
        double quad = 0.0;
        for (int j = 1; j <= n; ++j) quad += h * std::exp(-2.0 * 3.0 * j * h);
        EXPECT_NEAR(quad, noise_variance(ou, 1.0), h);
    }
    std::vector<double> at1;
    for (std::uint64_t p = 0; p < 20000; ++p) {
        at1.push_back(exact_sample_path(ou, generate_path(3, p, 1.0, 0x1.0p-11, 1), 1).anchor(1)[0]);
    }
    const double s1 = noise_variance(ou, 1.0);
    EXPECT_NEAR(oracle::sample_moments(at1).variance, s1, 4.0 * s1 * std::sqrt(2.0 / 20000.0) + 3.0 * 0x1.0p-11);
}

TEST(ExactSamplePath, AnchorsShareTheIntegerLaw) {
    std::vector<double> path_based, recursion_based;
    for (std::uint64_t p = 0; p < 10000; ++p) {
        path_based.push_back(exact_sample_path(kFig1, generate_path(41, p, 3.0, 0x1.0p-9, 1), 3).anchor(3)[0]);
        recursion_based.push_back(exact_sample_integer(kFig1, 41, p, 3)[3]);
    }
    const double d = oracle::ks_statistic(path_based, recursion_based);
    EXPECT_GT(oracle::ks_p_value(d, path_based.size(), recursion_based.size()), 0.01);
}

TEST(ExactSamplePath, RejectsShortGrid) {
    const BrownianGrid g = generate_path(1, 0, 2.0, 0x1.0p-4, 1);
    EXPECT_THROW(exact_sample_path(kFig1, g, 3), ValidationError);
}

TEST(BeChain, StationaryVarianceClosedForm) {
    // Y_{k+1} = μ_δ Y_k + N(0, s) with s = δ Σ_{j=1..m} ρ^{2j}.
    for (int m : {1, 4, 16, 64}) {
        const double delta = 1.0 / m, rho = 1.0 / (1.0 + delta * 3.0);
        double s = 0.0;
        for (int j = 1; j <= m; ++j) s += delta * std::pow(rho, 2 * j);
        EXPECT_NEAR(be_block_noise_variance(kFig1, m), s, 1e-15);
        const double mu = be_mean_multiplier(kFig1, m);
        EXPECT_NEAR(*be_stationary_variance(kFig1, m), s / (1 - mu * mu), 1e-15);
    }
    EXPECT_NEAR(*be_stationary_variance(kFig1, 1 << 14), *law(kFig1).stationary_variance, 1e-4);
}
