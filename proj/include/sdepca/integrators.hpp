#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "sdepca/brownian.hpp"
#include "sdepca/errors.hpp"
#include "sdepca/model.hpp"
#include "sdepca/types.hpp"

namespace sdepca {

enum class Fallback { bisection_1d, damped_newton };

/// Step-size configuration: m steps per unit interval, δ = 1/m.
struct BeConfig {
    int m = 1;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    Fallback fallback = Fallback::bisection_1d;

    double delta() const noexcept { return 1.0 / static_cast<double>(m); }
};

inline void validate(const BeConfig& cfg) {
    if (cfg.m < 1) throw ValidationError("steps per unit m must be >= 1");
    if (cfg.delta() * cfg.m != 1.0) throw ValidationError("delta * m must equal 1 exactly");
    if (!(cfg.newton_tol > 0.0)) throw ValidationError("newton_tol must be positive");
    if (cfg.newton_max_iter < 1) throw ValidationError("newton_max_iter must be >= 1");
}

/// Configuration for a dyadic step δ = 2^-k.
inline BeConfig config_for_step(double delta, BeConfig base = {}) {
    if (!is_dyadic_step(delta)) throw ValidationError("step size must be 2^-k, got " + std::to_string(delta));
    base.m = static_cast<int>(std::llround(1.0 / delta));
    validate(base);
    return base;
}

/// Piecewise record of one simulated path: column n is X_n at t_n = n/m,
/// so the block anchor Y_k = X_{km} is column k*m.
template <typename Scalar>
struct Trajectory {
    using VectorType = Vector<Scalar>;

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> states;  // d × (K·m + 1)
    int m = 1;
    std::string problem_tag;
    std::uint64_t path_index = 0;

    Eigen::Index steps() const noexcept { return states.cols() - 1; }
    std::int64_t blocks() const noexcept { return static_cast<std::int64_t>(steps() / m); }
    int dim() const noexcept { return static_cast<int>(states.rows()); }
    Scalar time(Eigen::Index n) const { return Scalar(n) / Scalar(m); }

    VectorType state(Eigen::Index n) const { return states.col(n); }
    VectorType anchor(std::int64_t k) const {
        if (k < 0 || k > blocks()) throw OutOfRangeError("anchor index " + std::to_string(k) + " out of range");
        return states.col(static_cast<Eigen::Index>(k) * m);
    }
    VectorType final_state() const { return states.col(states.cols() - 1); }
};

namespace detail {

template <typename Scalar>
struct NewtonOutcome {
    Vector<Scalar> x;
    Scalar residual;
    bool converged;
};

template <typename Scalar, typename Drift, typename Jacobian>
class ImplicitSystem {
public:
    using V = Vector<Scalar>;
    using M = Matrix<Scalar>;

    ImplicitSystem(const Drift& drift, const Jacobian& jac, const V& y, Scalar delta, const V& rhs)
        : drift_(drift), jac_(jac), y_(y), delta_(delta), rhs_(rhs) {}

    /// G(x) - rhs = x - δ f(x, y) - rhs.
    V residual(const V& x) const {
        const V f = drift_(x, y_);
        if (!f.allFinite()) throw NonFiniteError("drift returned a non-finite value");
        return x - delta_ * f - rhs_;
    }

    /// Residual magnitude that floating point cannot resolve below at x.
    Scalar resolution(const V& x) const {
        using std::abs;
        const Scalar scale = x.norm() + rhs_.norm() + abs(delta_) * drift_(x, y_).norm();
        return Scalar(64) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + scale);
    }

    M jacobian(const V& x) const {
        const int d = static_cast<int>(x.size());
        M jf(d, d);
        if (jac_) {
            jf = jac_(x, y_);
        } else {
            const Scalar h = Scalar(1e-7) * (Scalar(1) + x.norm());
            for (int j = 0; j < d; ++j) {
                V up = x, down = x;
                up[j] += h;
                down[j] -= h;
                jf.col(j) = (drift_(up, y_) - drift_(down, y_)) / (Scalar(2) * h);
            }
        }
        M g = -delta_ * jf;
        g.diagonal().array() += Scalar(1);
        if (!g.allFinite()) throw NonFiniteError("drift Jacobian returned a non-finite value");
        return g;
    }

    NewtonOutcome<Scalar> newton(V x, int max_iter, Scalar tol) const {
        V r = residual(x);
        Scalar rn = r.norm();
        for (int it = 0; it < max_iter; ++it) {
            // At least one correction, so small states are not accepted on the absolute tolerance alone.
            if (rn == Scalar(0) || (it > 0 && rn <= tol)) return {x, rn, true};
            const M jg = jacobian(x);
            V dx;
            if (x.size() == 1) {
                dx = r / jg(0, 0);
            } else {
                dx = jg.partialPivLu().solve(r);
            }
            Scalar step(1);
            V trial;
            V rt;
            Scalar rtn = std::numeric_limits<Scalar>::infinity();
            // Halve the step until the residual decreases.
            for (int halving = 0; halving < 60; ++halving) {
                trial = x - step * dx;
                rt = residual(trial);
                rtn = rt.norm();
                if (rtn < rn) break;
                step /= Scalar(2);
            }
            if (!(rtn < rn)) {
                // Stagnation: accept when already at floating-point resolution.
                return {x, rn, rn <= resolution(x)};
            }
            x = trial;
            r = rt;
            rn = rtn;
        }
        return {x, rn, rn <= tol};
    }

    /// Safeguarded bisection for d = 1; G is increasing under the one-sided
    /// Lipschitz condition, so the root is bracketed by growing outwards.
    NewtonOutcome<Scalar> bisect(Scalar tol) const {
        using std::abs;
        auto g = [&](Scalar v) { return residual(V::Constant(1, v))[0]; };
        const Scalar center = rhs_[0];
        Scalar half_width = Scalar(1) + abs(center);
        Scalar lo = center - half_width, hi = center + half_width;
        Scalar glo = g(lo), ghi = g(hi);
        for (int grow = 0; grow < 200 && !(glo <= 0 && ghi >= 0); ++grow) {
            half_width *= Scalar(2);
            lo = center - half_width;
            hi = center + half_width;
            glo = g(lo);
            ghi = g(hi);
        }
        if (!(glo <= 0 && ghi >= 0)) return {V::Constant(1, center), abs(g(center)), false};
        for (int it = 0; it < 4000; ++it) {
            const Scalar mid = lo + (hi - lo) / Scalar(2);
            const Scalar gm = g(mid);
            if (abs(gm) <= tol) return {V::Constant(1, mid), abs(gm), true};
            if (mid <= lo || mid >= hi) break;
            if (gm < 0) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
                ghi = gm;
            }
        }
        const Scalar best = abs(glo) < abs(ghi) ? lo : hi;
        const Scalar best_residual = (std::min)(abs(glo), abs(ghi));
        const V xb = V::Constant(1, best);
        return {xb, best_residual, best_residual <= tol || best_residual <= resolution(xb)};
    }

private:
    const Drift& drift_;
    const Jacobian& jac_;
    const V& y_;
    Scalar delta_;
    const V& rhs_;
};

}  // namespace detail

/// Solves x - δ f(x, y_block) = rhs, i.e. x = G⁻¹(rhs).
///
/// Newton from x = rhs with step halving on residual increase, using the
/// analytic Jacobian when `jac` is set and central differences otherwise.
/// On failure the configured fallback runs (bisection for d = 1, or a
/// longer damped Newton). Throws NonConvergenceError carrying the last
/// residual, or NonFiniteError if the drift produces NaN/Inf.
template <typename Scalar, typename Drift, typename Jacobian>
Vector<Scalar> solve_implicit(const Drift& drift, const Jacobian& jac, const Vector<Scalar>& y_block, Scalar delta,
                              const Vector<Scalar>& rhs, const BeConfig& cfg) {
    if (!rhs.allFinite()) throw NonFiniteError("implicit solve received a non-finite right-hand side");
    if (delta == Scalar(0)) return rhs;
    const detail::ImplicitSystem<Scalar, Drift, Jacobian> system(drift, jac, y_block, delta, rhs);
    const Scalar tol(cfg.newton_tol);
    auto outcome = system.newton(rhs, cfg.newton_max_iter, tol);
    if (outcome.converged) return outcome.x;
    if (cfg.fallback == Fallback::bisection_1d && rhs.size() == 1) {
        outcome = system.bisect(tol);
    } else {
        outcome = system.newton(outcome.x, 4 * cfg.newton_max_iter, tol);
    }
    if (outcome.converged) return outcome.x;
    throw NonConvergenceError("implicit solve did not converge, residual " + std::to_string(double(outcome.residual)),
                              double(outcome.residual));
}

/// One backward Euler step:
/// X_{n+1} = G⁻¹(X_n + g(X_n, Y_k) ΔB_n) with G(x) = x - δ f(x, Y_k).
template <typename Scalar>
Vector<Scalar> be_step(const Problem<Scalar>& problem, const BeConfig& cfg, const Vector<Scalar>& x_prev,
                       const Vector<Scalar>& y_block, const Vector<Scalar>& dB) {
    const Vector<Scalar> rhs = x_prev + problem.diffusion(x_prev, y_block) * dB;
    return solve_implicit<Scalar>(problem.drift, problem.drift_jacobian_x, y_block, Scalar(cfg.delta()), rhs, cfg);
}

/// Explicit Euler–Maruyama step X_{n+1} = X_n + δ f(X_n, Y_k) + g(X_n, Y_k) ΔB_n.
template <typename Scalar>
Vector<Scalar> em_step(const Problem<Scalar>& problem, const BeConfig& cfg, const Vector<Scalar>& x_prev,
                       const Vector<Scalar>& y_block, const Vector<Scalar>& dB) {
    return x_prev + Scalar(cfg.delta()) * problem.drift(x_prev, y_block) + problem.diffusion(x_prev, y_block) * dB;
}

/// Split-step backward Euler: X* = X_n + δ f(X*, Y_k), then
/// X_{n+1} = X* + g(X*, Y_k) ΔB_n.
template <typename Scalar>
Vector<Scalar> ssbe_step(const Problem<Scalar>& problem, const BeConfig& cfg, const Vector<Scalar>& x_prev,
                         const Vector<Scalar>& y_block, const Vector<Scalar>& dB) {
    const Vector<Scalar> star =
        solve_implicit<Scalar>(problem.drift, problem.drift_jacobian_x, y_block, Scalar(cfg.delta()), x_prev, cfg);
    return star + problem.diffusion(star, y_block) * dB;
}

enum class Scheme { backward_euler, euler_maruyama, split_step_backward_euler };

namespace detail {

template <typename Scalar, typename Step>
Trajectory<Scalar> run_blocks(const Problem<Scalar>& problem, const BeConfig& cfg, const IncrementPath& increments,
                              std::int64_t K, std::uint64_t path_index, const Step& step) {
    validate(problem);
    validate(cfg);
    if (K < 0) throw ValidationError("number of unit blocks must be nonnegative");
    if (increments.step != cfg.delta()) {
        throw ValidationError("increment step " + std::to_string(increments.step) + " does not match delta " +
                              std::to_string(cfg.delta()));
    }
    if (increments.dim_noise() != problem.dim_noise) throw ValidationError("noise dimension mismatch");
    const std::int64_t m = cfg.m;
    if (K * m > increments.size()) {
        throw ValidationError("Brownian path covers " + std::to_string(increments.size() / m) + " units, " +
                              std::to_string(K) + " requested");
    }
    Trajectory<Scalar> traj;
    traj.m = cfg.m;
    traj.problem_tag = problem.tag;
    traj.path_index = path_index;
    traj.states.resize(problem.dim_state, K * m + 1);
    traj.states.col(0) = problem.initial_state;

    Vector<Scalar> x = problem.initial_state;
    Vector<Scalar> dB(problem.dim_noise);
    for (std::int64_t k = 0; k < K; ++k) {
        const Vector<Scalar> y = x;
        for (std::int64_t l = 0; l < m; ++l) {
            const std::int64_t n = k * m + l;
            dB = increments.values.col(n).template cast<Scalar>();
            try {
                x = step(problem, cfg, x, y, dB);
                if (!x.allFinite()) throw NonFiniteError("state became non-finite");
            } catch (NumericalError& e) {
                e.set_location(static_cast<std::int64_t>(path_index), k, l);
                throw;
            }
            traj.states.col(n + 1) = x;
        }
    }
    return traj;
}

template <typename Scalar>
Trajectory<Scalar> dispatch(Scheme scheme, const Problem<Scalar>& problem, const BeConfig& cfg,
                            const IncrementPath& increments, std::int64_t K, std::uint64_t path_index) {
    switch (scheme) {
        case Scheme::backward_euler:
            return run_blocks(problem, cfg, increments, K, path_index, be_step<Scalar>);
        case Scheme::euler_maruyama:
            return run_blocks(problem, cfg, increments, K, path_index, em_step<Scalar>);
        case Scheme::split_step_backward_euler:
            return run_blocks(problem, cfg, increments, K, path_index, ssbe_step<Scalar>);
    }
    throw ValidationError("unknown scheme");
}

inline IncrementPath coarsen_to(const BrownianGrid& grid, const BeConfig& cfg) {
    validate(cfg);
    const std::int64_t factor = exact_step_count(cfg.delta(), grid.fine_step());
    return coarsen(grid, factor);
}

}  // namespace detail

/// Simulates K unit blocks with the given scheme on increments already at step δ.
template <typename Scalar>
Trajectory<Scalar> simulate(Scheme scheme, const Problem<Scalar>& problem, const BeConfig& cfg,
                            const IncrementPath& increments, std::int64_t K, std::uint64_t path_index = 0) {
    return detail::dispatch(scheme, problem, cfg, increments, K, path_index);
}

/// Simulates K unit blocks on the coarsening of a fine Brownian grid to step δ.
template <typename Scalar>
Trajectory<Scalar> simulate(Scheme scheme, const Problem<Scalar>& problem, const BeConfig& cfg,
                            const BrownianGrid& grid, std::int64_t K) {
    return detail::dispatch(scheme, problem, cfg, detail::coarsen_to(grid, cfg), K, grid.path_index());
}

template <typename Scalar>
Trajectory<Scalar> simulate_be(const Problem<Scalar>& problem, const BeConfig& cfg, const BrownianGrid& grid,
                               std::int64_t K) {
    return simulate(Scheme::backward_euler, problem, cfg, grid, K);
}

template <typename Scalar>
Trajectory<Scalar> simulate_em(const Problem<Scalar>& problem, const BeConfig& cfg, const BrownianGrid& grid,
                               std::int64_t K) {
    return simulate(Scheme::euler_maruyama, problem, cfg, grid, K);
}

template <typename Scalar>
Trajectory<Scalar> simulate_ssbe(const Problem<Scalar>& problem, const BeConfig& cfg, const BrownianGrid& grid,
                                 std::int64_t K) {
    return simulate(Scheme::split_step_backward_euler, problem, cfg, grid, K);
}

}  // namespace sdepca
