#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sdepca/integrators.hpp"
#include "sdepca/linear_analytic.hpp"
#include "sdepca/problems.hpp"

using namespace sdepca;

namespace {

using Drift = Problem<double>::DriftFn;
using Jac = Problem<double>::JacobianFn;

VectorD v1(double x) { return VectorD::Constant(1, x); }

IncrementPath zero_path(double step, Eigen::Index n) {
    IncrementPath p;
    p.step = step;
    p.values = Eigen::MatrixXd::Zero(1, n);
    return p;
}

Problem<double> problem_of(Drift f, Problem<double>::DiffusionFn g, double x0) {
    Problem<double> p;
    p.tag = "custom";
    p.drift = std::move(f);
    p.diffusion = std::move(g);
    p.initial_state = v1(x0);
    return p;
}

MatrixD zero_g(const VectorD&, const VectorD&) { return MatrixD::Zero(1, 1); }
MatrixD unit_g(const VectorD&, const VectorD&) { return MatrixD::Ones(1, 1); }
VectorD zero_f(const VectorD& x, const VectorD&) { return VectorD::Zero(x.size()); }

double cubic_residual(double x, double delta, double y, double rhs) {
    return x - delta * (-x * x * x - 10 * x + 2 * y + 1) - rhs;
}

}  // namespace

TEST(SolveImplicit, LinearClosedForm) {
    const auto p = linear_additive(3.0, 1.0, 1.0);
    const BeConfig cfg = config_for_step(0.5);
    const VectorD x = solve_implicit<double>(p.drift, p.drift_jacobian_x, v1(1.0), 0.5, v1(1.0), cfg);
    EXPECT_NEAR(x[0], 0.6, 1e-15);
    EXPECT_LT(std::abs(x[0] - 0.5 * p.drift(x, v1(1.0))[0] - 1.0), 1e-12);
}

TEST(SolveImplicit, ZeroStepIsIdentity) {
    const auto p = cubic_multiplicative(1.0, 1.0, 2.0);
    const VectorD x = solve_implicit<double>(p.drift, p.drift_jacobian_x, v1(3.0), 0.0, v1(1.25), BeConfig{});
    EXPECT_EQ(x[0], 1.25);
}

TEST(SolveImplicit, CubicAgainstBisection) {
    const auto p = cubic_multiplicative(1.0, 1.0, 2.0);
    const VectorD x = solve_implicit<double>(p.drift, p.drift_jacobian_x, v1(0.0), 0.1, v1(0.0), BeConfig{});
    const double ref = oracle::bisect([](double v) { return 0.1 * v * v * v + 2 * v - 0.1; }, -1.0, 1.0);
    EXPECT_NEAR(x[0], ref, 1e-12);
    EXPECT_NEAR(x[0], 0.0499938, 1e-7);
}

TEST(SolveImplicit, FiniteDifferenceJacobianPath) {
    const auto p = cubic_multiplicative(1.0, 1.0, 2.0);
    const Jac none;
    oracle::Gen gen(4);
    for (int i = 0; i < 200; ++i) {
        const double y = gen.uniform(-5, 5), rhs = gen.uniform(-50, 50), delta = std::ldexp(1.0, -gen.integer(0, 10));
        const VectorD a = solve_implicit<double>(p.drift, none, v1(y), delta, v1(rhs), BeConfig{});
        const VectorD b = solve_implicit<double>(p.drift, p.drift_jacobian_x, v1(y), delta, v1(rhs), BeConfig{});
        EXPECT_NEAR(a[0], b[0], 1e-10 * (1 + std::abs(b[0])));
    }
}

TEST(SolveImplicit, TwoDimensionalLinearSystem) {
    Eigen::Matrix2d A;
    A << -3.0, 1.0, -0.5, -2.0;
    const Drift f = [A](const VectorD& x, const VectorD& y) { return VectorD(A * x + y); };
    const Jac none;
    const VectorD y = (VectorD(2) << 0.3, -0.7).finished();
    const VectorD rhs = (VectorD(2) << 1.5, 2.0).finished();
    const double delta = 0.25;
    const VectorD x = solve_implicit<double>(f, none, y, delta, rhs, BeConfig{});
    const Eigen::Vector2d expect = (Eigen::Matrix2d::Identity() - delta * A).lu().solve(Eigen::Vector2d(rhs + delta * y));
    EXPECT_NEAR((x - VectorD(expect)).norm(), 0.0, 1e-12);
}

TEST(SolveImplicit, NonFiniteDrift) {
    const Drift f = [](const VectorD&, const VectorD&) { return v1(std::nan("")); };
    const Jac none;
    EXPECT_THROW(solve_implicit<double>(f, none, v1(0.0), 0.5, v1(1.0), BeConfig{}), NonFiniteError);
    EXPECT_THROW(solve_implicit<double>(f, none, v1(0.0), 0.5, v1(std::nan("")), BeConfig{}), NonFiniteError);
}

TEST(SolveImplicit, NoRootRaisesNonConvergence) {
    // G(x) = atan(x) never reaches 5.
    const double delta = 0.5;
    const Drift f = [delta](const VectorD& x, const VectorD&) { return v1((x[0] - std::atan(x[0])) / delta); };
    const Jac none;
    for (Fallback fb : {Fallback::bisection_1d, Fallback::damped_newton}) {
        BeConfig cfg = config_for_step(delta);
        cfg.fallback = fb;
        try {
            solve_implicit<double>(f, none, v1(0.0), delta, v1(5.0), cfg);
            FAIL() << "expected NonConvergenceError";
        } catch (const NonConvergenceError& e) {
            EXPECT_GT(e.last_residual(), 5.0 - M_PI / 2 - 1e-9);
            EXPECT_EQ(e.code(), "non_convergence");
        }
    }
}

TEST(SolveImplicit, BisectionFallbackRescuesStarvedNewton) {
    const auto p = cubic_multiplicative(1.0, 1.0, 2.0);
    BeConfig cfg;
    cfg.newton_max_iter = 1;
    const VectorD x = solve_implicit<double>(p.drift, p.drift_jacobian_x, v1(1.0), 1.0, v1(40.0), cfg);
    EXPECT_LE(std::abs(cubic_residual(x[0], 1.0, 1.0, 40.0)), 1e-10);
}

TEST(SolveImplicit, LinearClosedFormRandomized) {
    oracle::Gen gen(101);
    for (int i = 0; i < 10000; ++i) {
        const double t1 = gen.uniform(0.01, 10), t2 = gen.uniform(-10, 10);
        const int m = 1 << gen.integer(0, 11);
        const double delta = 1.0 / m;
        const double xp = gen.uniform(-10, 10), y = gen.uniform(-10, 10), dB = gen.uniform(-1, 1);
        const auto p = linear_additive(t1, t2, 0.0);
        const VectorD got = be_step(p, config_for_step(delta), v1(xp), v1(y), v1(dB));
        const double expect = (xp + delta * t2 * y + dB) / (1 + delta * t1);
        ASSERT_NEAR(got[0], expect, 1e-12 * std::max(1.0, std::abs(expect)));
    }
}

TEST(SolveImplicit, CubicMatchesBisectionRandomized) {
    const auto p = cubic_multiplicative(1.0, 1.0, 2.0);
    oracle::Gen gen(202);
    for (int i = 0; i < 1000; ++i) {
        const double delta = std::ldexp(1.0, -gen.integer(0, 11));
        const double y = gen.uniform(-5, 5), rhs = gen.uniform(-100, 100);
        const VectorD got = solve_implicit<double>(p.drift, p.drift_jacobian_x, v1(y), delta, v1(rhs), BeConfig{});
        const double hw = 1 + std::abs(rhs) + std::abs(y);
        const double ref = oracle::bisect([&](double v) { return cubic_residual(v, delta, y, rhs); }, -hw, hw);
        ASSERT_NEAR(got[0], ref, 1e-10) << "delta=" << delta << " y=" << y << " rhs=" << rhs;
    }
}

TEST(BeStep, Examples) {
    const auto p = linear_additive(3.0, 1.0, 1.0);
    const BeConfig cfg = config_for_step(0.5);
    EXPECT_NEAR(be_step(p, cfg, v1(1.0), v1(1.0), v1(0.0))[0], 0.6, 1e-15);
    EXPECT_NEAR(be_step(p, cfg, v1(0.6), v1(1.0), v1(0.0))[0], 0.44, 1e-15);
    const auto still = problem_of(zero_f, unit_g, 0.0);
    EXPECT_EQ(be_step(still, cfg, v1(0.37), v1(2.0), v1(0.0))[0], 0.37);
}

TEST(BeStep, ExtendedPrecisionInstantiation) {
    const auto p = linear_additive<long double>(3.0L, 1.0L, 1.0L);
    const BeConfig cfg = config_for_step(0.5);
    using VL = Vector<long double>;
    const VL one = VL::Constant(1, 1.0L), zero = VL::Constant(1, 0.0L);
    const VL got = be_step(p, cfg, one, one, zero);
    EXPECT_LT(std::abs(static_cast<double>(got[0] - 0.6L)), 1e-18);
}

TEST(SimulateBe, ZeroNoiseTwoSteps) {
    const auto p = linear_additive(3.0, 1.0, 1.0);
    const auto traj = simulate(Scheme::backward_euler, p, config_for_step(0.5), zero_path(0.5, 4), 2);
    EXPECT_EQ(traj.steps(), 4);
    EXPECT_EQ(traj.blocks(), 2);
    EXPECT_EQ(traj.anchor(0)[0], 1.0);
    EXPECT_NEAR(traj.anchor(1)[0], 0.44, 1e-15);
    EXPECT_DOUBLE_EQ(traj.time(3), 1.5);
    EXPECT_THROW(traj.anchor(3), OutOfRangeError);
}

TEST(SimulateBe, ConstantWithoutDriftAndDiffusion) {
    const auto p = problem_of(zero_f, zero_g, -1.5);
    const BrownianGrid g = generate_path(1, 0, 3.0, 0x1.0p-4, 1);
    const auto traj = simulate_be(p, config_for_step(0x1.0p-2), g, 3);
    for (Eigen::Index n = 0; n <= traj.steps(); ++n) EXPECT_EQ(traj.state(n)[0], -1.5);
}

TEST(SimulateBe, AnchorIsHeldThroughEachBlock) {
    // f = y only: inside block k the state grows linearly at rate Y_k.
    const auto p = problem_of([](const VectorD&, const VectorD& y) { return VectorD(y); }, zero_g, 1.0);
    const auto traj = simulate(Scheme::backward_euler, p, config_for_step(0.25), zero_path(0.25, 8), 2);
    EXPECT_NEAR(traj.anchor(1)[0], 2.0, 1e-15);
    EXPECT_NEAR(traj.state(5)[0], 2.5, 1e-15);
    EXPECT_NEAR(traj.anchor(2)[0], 4.0, 1e-15);
}

TEST(SimulateBe, ZeroNoiseMeanMultiplierLaw) {
    oracle::Gen gen(303);
    for (int i = 0; i < 300; ++i) {
        const double t1 = gen.uniform(0.1, 6), t2 = gen.uniform(-4, 4), x0 = gen.uniform(-3, 3);
        const int m = 1 << gen.integer(0, 7);
        const LinearAdditiveParams<double> lp{t1, t2, x0};
        const auto traj = simulate(Scheme::backward_euler, linear_additive(t1, t2, x0), config_for_step(1.0 / m),
                                   zero_path(1.0 / m, 10 * m), 10);
        const double mu = be_mean_multiplier(lp, m);
        for (int k = 0; k <= 10; ++k) {
            const double expect = x0 * std::pow(mu, k);
            // Relative agreement down to the Newton residual tolerance.
            ASSERT_NEAR(traj.anchor(k)[0], expect, 1e-10 * std::abs(expect) + 1e-11)
                << "t1=" << t1 << " t2=" << t2 << " m=" << m << " k=" << k;
        }
    }
}

TEST(SimulateBe, MeanMultiplierFirstOrderConsistent) {
    const LinearAdditiveParams<double> lp{3.0, 1.0, 1.0};
    const double exact = law(lp).mu_one;
    double previous = std::abs(be_mean_multiplier(lp, 16) - exact);
    for (int m = 32; m <= 4096; m *= 2) {
        const double err = std::abs(be_mean_multiplier(lp, m) - exact);
        EXPECT_NEAR(previous / err, 2.0, 0.1) << "m=" << m;
        previous = err;
    }
}

TEST(SimulateBe, RejectsMismatchedInput) {
    const auto p = linear_additive(3.0, 1.0, 1.0);
    EXPECT_THROW(simulate(Scheme::backward_euler, p, config_for_step(0.5), zero_path(0.25, 8), 1), ValidationError);
    EXPECT_THROW(simulate(Scheme::backward_euler, p, config_for_step(0.5), zero_path(0.5, 3), 2), ValidationError);
    EXPECT_THROW(simulate(Scheme::backward_euler, p, config_for_step(0.5), zero_path(0.5, 4), -1), ValidationError);
    EXPECT_THROW(config_for_step(0.3), ValidationError);
    const BrownianGrid g = generate_path(1, 0, 1.0, 0.5, 1);
    EXPECT_THROW(simulate_be(p, config_for_step(0.25), g, 1), ValidationError);
}

TEST(SimulateEm, PureIntegration) {
    const auto p = problem_of(zero_f, unit_g, 0.0);
    const BrownianGrid g = generate_path(8, 1, 2.0, 0x1.0p-5, 1);
    const auto traj = simulate_em(p, config_for_step(0x1.0p-5), g, 2);
    double sum = 0.0;
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        sum += g.increments()(0, n);
        EXPECT_NEAR(traj.state(n + 1)[0], sum, 1e-14);
    }
}

TEST(SimulateEm, ZeroNoiseLinearMeanWithinOrderDelta) {
    const LinearAdditiveParams<double> lp{3.0, 1.0, 1.0};
    const int m = 1024;
    const auto traj = simulate(Scheme::euler_maruyama, linear_additive(3.0, 1.0, 1.0), config_for_step(1.0 / m),
                               zero_path(1.0 / m, 3 * m), 3);
    for (Eigen::Index n = 0; n <= traj.steps(); n += 37) {
        const double t = traj.time(n);
        EXPECT_NEAR(traj.state(n)[0], exact_mean(lp, t), 3.0 / m) << "t=" << t;
    }
}

TEST(SimulateEm, ExplicitCubicBlowsUpWithLocation) {
    const auto p = cubic_multiplicative(1.0, 1.0, 10.0);
    try {
        simulate(Scheme::euler_maruyama, p, config_for_step(0.5), zero_path(0.5, 40), 20, 17);
        FAIL() << "expected NonFiniteError";
    } catch (const NonFiniteError& e) {
        EXPECT_TRUE(e.has_location());
        EXPECT_EQ(e.path_index(), 17);
        EXPECT_GE(e.block(), 0);
        EXPECT_NE(e.describe().find("path=17"), std::string::npos);
    }
}

TEST(SimulateSsbe, ZeroNoiseEqualsBackwardEuler) {
    const auto p = cubic_multiplicative(0.0, 0.0, 2.0);
    const BrownianGrid g = generate_path(3, 3, 4.0, 0x1.0p-6, 1);
    const BeConfig cfg = config_for_step(0x1.0p-4);
    const auto a = simulate_ssbe(p, cfg, g, 4);
    const auto b = simulate_be(p, cfg, g, 4);
    EXPECT_LT((a.states - b.states).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SimulateSsbe, NoDriftIsExplicitEuler) {
    const auto p = problem_of(zero_f, [](const VectorD& x, const VectorD& y) { return MatrixD(MatrixD::Constant(1, 1, 0.5 * x[0] + y[0])); }, 1.0);
    const BrownianGrid g = generate_path(4, 0, 2.0, 0x1.0p-5, 1);
    const BeConfig cfg = config_for_step(0x1.0p-3);
    const auto a = simulate_ssbe(p, cfg, g, 2);
    const auto b = simulate_em(p, cfg, g, 2);
    EXPECT_TRUE(a.states == b.states);
}

TEST(SimulateSsbe, SelfConvergenceOnCommonPaths) {
    const auto p = cubic_multiplicative(1.0, 1.0, 2.0);
    double coarse_err = 0.0, fine_err = 0.0;
    const int n = 200;
    for (int path = 0; path < n; ++path) {
        const BrownianGrid g = generate_path(55, static_cast<std::uint64_t>(path), 1.0, 0x1.0p-11, 1);
        const double ref = simulate_ssbe(p, config_for_step(0x1.0p-11), g, 1).anchor(1)[0];
        coarse_err += std::abs(simulate_ssbe(p, config_for_step(0x1.0p-5), g, 1).anchor(1)[0] - ref);
        fine_err += std::abs(simulate_ssbe(p, config_for_step(0x1.0p-9), g, 1).anchor(1)[0] - ref);
    }
    coarse_err /= n;
    fine_err /= n;
    EXPECT_LT(fine_err, coarse_err);
    EXPECT_LT(fine_err, 0.5 * std::sqrt(0x1.0p-9));
}

TEST(Trajectory, StartsAtInitialStateAndStaysFinite) {
    const auto p = cubic_multiplicative(1.0, 1.0, 2.0);
    const BrownianGrid g = generate_path(6, 6, 5.0, 0x1.0p-6, 1);
    const auto traj = simulate_be(p, config_for_step(0x1.0p-6), g, 5);
    EXPECT_EQ(traj.anchor(0)[0], 2.0);
    EXPECT_TRUE(traj.states.allFinite());
    EXPECT_EQ(traj.problem_tag, "cubic-multiplicative");
    EXPECT_EQ(traj.path_index, 6u);
    EXPECT_EQ(traj.final_state()[0], traj.anchor(5)[0]);
}

TEST(BeConfig, Validation) {
    BeConfig cfg;
    cfg.m = 0;
    EXPECT_THROW(validate(cfg), ValidationError);
    cfg.m = 4;
    cfg.newton_tol = 0;
    EXPECT_THROW(validate(cfg), ValidationError);
    cfg.newton_tol = 1e-12;
    EXPECT_NO_THROW(validate(cfg));
    EXPECT_EQ(cfg.delta() * cfg.m, 1.0);
}
