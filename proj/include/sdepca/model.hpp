#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>

#include "sdepca/errors.hpp"
#include "sdepca/rng.hpp"
#include "sdepca/types.hpp"

namespace sdepca {

/// dX(t) = f(X(t), X([t])) dt + g(X(t), X([t])) dB(t), X(0) = initial_state.
///
/// `drift` returns a d-vector, `diffusion` a d×r matrix. The optional
/// `drift_jacobian_x` returns ∂f/∂x (d×d) and is used by the implicit solver
/// when present.
template <typename Scalar>
struct Problem {
    using VectorType = Vector<Scalar>;
    using MatrixType = Matrix<Scalar>;
    using DriftFn = std::function<VectorType(const VectorType&, const VectorType&)>;
    using DiffusionFn = std::function<MatrixType(const VectorType&, const VectorType&)>;
    using JacobianFn = std::function<MatrixType(const VectorType&, const VectorType&)>;

    std::string tag;
    int dim_state = 1;
    int dim_noise = 1;
    DriftFn drift;
    DiffusionFn diffusion;
    VectorType initial_state;
    JacobianFn drift_jacobian_x;

    bool has_jacobian() const noexcept { return static_cast<bool>(drift_jacobian_x); }

    Problem with_initial_state(VectorType x) const {
        Problem copy = *this;
        copy.initial_state = std::move(x);
        return copy;
    }
};

template <typename Scalar>
void validate(const Problem<Scalar>& problem) {
    if (problem.dim_state < 1 || problem.dim_state > kMaxDim || problem.dim_noise < 1 ||
        problem.dim_noise > kMaxDim) {
        throw ValidationError("problem dimensions must lie in [1, " + std::to_string(kMaxDim) + "]");
    }
    if (!problem.drift || !problem.diffusion) throw ValidationError("problem needs drift and diffusion");
    if (problem.initial_state.size() != problem.dim_state) {
        throw ValidationError("initial state has dimension " + std::to_string(problem.initial_state.size()) +
                              ", expected " + std::to_string(problem.dim_state));
    }
    if (!problem.initial_state.allFinite()) throw ValidationError("initial state must be finite");
}

/// λ₁: one-sided Lipschitz constant of f in x; λ₂: Lipschitz-squared
/// constant of f in y; λ₃: Lipschitz-squared constant of g. The two norms
/// enter the linear-growth bounds 2⟨x, f(x,y)⟩ ≤ -(2λ₁-1)‖x‖² + 2λ₂‖y‖² + 2‖f(0,0)‖²
/// and ‖g(x,y)‖² ≤ 2λ₃(‖x‖² + ‖y‖²) + 2‖g(0,0)‖².
template <typename Scalar>
struct DissipativityParams {
    Scalar lambda1{};
    Scalar lambda2{};
    Scalar lambda3{};
    Scalar f00_norm_sq{};
    Scalar g00_norm_sq{};

    /// λ₁ - λ₂ - 2λ₃ - 1.
    Scalar ergodicity_margin() const { return lambda1 - lambda2 - Scalar(2) * lambda3 - Scalar(1); }
};

template <typename Scalar>
void validate(const DissipativityParams<Scalar>& p) {
    if (!(p.lambda1 > 0) || !(p.lambda2 > 0) || !(p.lambda3 > 0)) {
        throw ValidationError("lambda1, lambda2, lambda3 must be strictly positive");
    }
    if (!(p.f00_norm_sq >= 0) || !(p.g00_norm_sq >= 0)) {
        throw ValidationError("coefficient norms at the origin must be nonnegative");
    }
}

/// Fills the origin norms ‖f(0,0)‖², ‖g(0,0)‖² (Frobenius) from the problem.
template <typename Scalar>
DissipativityParams<Scalar> with_origin_norms(DissipativityParams<Scalar> params, const Problem<Scalar>& problem) {
    const typename Problem<Scalar>::VectorType zero = Problem<Scalar>::VectorType::Zero(problem.dim_state);
    params.f00_norm_sq = problem.drift(zero, zero).squaredNorm();
    params.g00_norm_sq = problem.diffusion(zero, zero).squaredNorm();
    return params;
}

template <typename Scalar>
bool check_ergodicity_condition(const DissipativityParams<Scalar>& params) {
    validate(params);
    return params.ergodicity_margin() > Scalar(0);
}

/// λ₁ - λ₂ - 2λ₃ - 1 > 4λ₃(p - 1): uniform 2p-th moment bounds.
template <typename Scalar>
bool check_moment_condition(const DissipativityParams<Scalar>& params, int p) {
    if (p < 1) throw ValidationError("moment order p must be >= 1, got " + std::to_string(p));
    validate(params);
    return params.ergodicity_margin() > Scalar(4) * params.lambda3 * Scalar(p - 1);
}

/// Contraction-rate constants for the exact flow and for backward Euler at
/// step δ = 1/m.
template <typename Scalar>
struct ContractionRates {
    Scalar delta{};
    int m = 1;

    // Exact solution: mean-square bound per unit time.
    Scalar alpha{};     // 2λ₁ - 2λ₃ - 1
    Scalar beta{};      // 2(λ₂ + λ₃)
    Scalar gamma{};     // 2(‖f(0,0)‖² + ‖g(0,0)‖²)
    Scalar r_one{};     // r(1)
    Scalar rbar_one{};  // r̄(1), two-solution contraction

    // Backward Euler, step dependent.
    Scalar alpha1{};
    Scalar beta1{};
    Scalar gamma1{};
    Scalar alpha2{};
    Scalar beta2{};
    Scalar rbar1_block{};  // r̄₁(m-1)

    /// r({t}) = β/α + (1 - β/α) e^{-α{t}}.
    Scalar r(Scalar frac) const {
        using std::exp;
        return beta / alpha + (Scalar(1) - beta / alpha) * exp(-alpha * frac);
    }
    /// r₁(l): moment bound factor after l+1 steps inside a block.
    Scalar r1(int l) const {
        using std::exp;
        return beta1 / alpha1 + (Scalar(1) - beta1 / alpha1) * exp(-alpha1 * Scalar(l + 1) * delta);
    }
    /// r̄₁(l): contraction factor after l+1 steps inside a block.
    Scalar rbar1(int l) const {
        using std::exp;
        return beta2 / alpha2 + (Scalar(1) - beta2 / alpha2) * exp(-alpha2 * Scalar(l + 1) * delta);
    }
};

template <typename Scalar>
ContractionRates<Scalar> contraction_rates(const DissipativityParams<Scalar>& params, Scalar delta, int m) {
    using std::abs;
    using std::exp;
    validate(params);
    // δ = 1/m up to the rounding of the division.
    const Scalar slack = Scalar(8) * std::numeric_limits<Scalar>::epsilon();
    if (m < 1 || !(delta > 0) || !(delta <= 1) || abs(delta * Scalar(m) - Scalar(1)) > slack) {
        throw ValidationError("contraction rates need delta = 1/m in (0, 1]");
    }
    if (!check_ergodicity_condition(params)) {
        throw ValidationError("contraction rates need lambda1 - lambda2 - 2 lambda3 - 1 > 0");
    }
    const Scalar one(1), two(2);
    ContractionRates<Scalar> rates;
    rates.delta = delta;
    rates.m = m;
    rates.alpha = two * params.lambda1 - two * params.lambda3 - one;
    rates.beta = two * (params.lambda2 + params.lambda3);
    rates.gamma = two * (params.f00_norm_sq + params.g00_norm_sq);
    rates.r_one = rates.r(one);
    const Scalar half_ratio = rates.beta / (two * rates.alpha);
    rates.rbar_one = half_ratio + (one - half_ratio) * exp(-rates.alpha);

    const Scalar denom = one + (two * params.lambda1 - one) * delta;
    rates.alpha1 = (two * params.lambda1 - two * params.lambda3 - one) / denom;
    rates.beta1 = two * (params.lambda2 + params.lambda3) / denom;
    rates.gamma1 = two * (params.f00_norm_sq + params.g00_norm_sq) / denom;
    rates.alpha2 = (two * params.lambda1 - params.lambda3 - one) / denom;
    rates.beta2 = (params.lambda2 + params.lambda3) / denom;
    rates.rbar1_block = rates.rbar1(m - 1);
    return rates;
}

struct InequalityProbe {
    std::size_t violations = 0;
    /// Largest observed lhs - rhs; positive values are violations.
    double worst_margin = -std::numeric_limits<double>::infinity();
};

struct ProbeReport {
    std::size_t n_probes = 0;
    double radius = 0.0;
    double tolerance = 1e-10;
    InequalityProbe monotone;  // ⟨x₁-x₂, f(x₁,y)-f(x₂,y)⟩ ≤ -λ₁‖x₁-x₂‖²
    InequalityProbe muy;       // ‖f(x,y₁)-f(x,y₂)‖² ≤ λ₂‖y₁-y₂‖²
    InequalityProbe sigma;     // ‖g(x₁,y₁)-g(x₂,y₂)‖² ≤ λ₃(‖x₁-x₂‖² + ‖y₁-y₂‖²)

    std::size_t total_violations() const noexcept {
        return monotone.violations + muy.violations + sigma.violations;
    }
};

namespace detail {

// Uniform point in the d-ball of the given radius, from draws [first, first + d + 1).
inline VectorD ball_point(const GaussianStream& stream, std::uint64_t first, int d, double radius) {
    VectorD direction(d);
    for (int i = 0; i < d; ++i) direction[i] = stream.normal(first + static_cast<std::uint64_t>(i));
    const double norm = direction.norm();
    const double u = stream.uniform(first + static_cast<std::uint64_t>(d));
    const double scale = radius * std::pow(u, 1.0 / d) / (norm > 0.0 ? norm : 1.0);
    return direction * scale;
}

inline void record(InequalityProbe& probe, double margin, double tolerance) {
    if (margin > probe.worst_margin) probe.worst_margin = margin;
    if (margin > tolerance) ++probe.violations;
}

}  // namespace detail

/// Falsification test of the three dissipativity inequalities at random
/// points of the ball of `radius`. Probe i uses its own counter-based
/// sub-stream, so the report depends only on the arguments.
inline ProbeReport probe_dissipativity(const Problem<double>& problem, const DissipativityParams<double>& params,
                                       std::size_t n_probes, double radius, std::uint64_t seed) {
    validate(problem);
    validate(params);
    if (n_probes < 1) throw ValidationError("n_probes must be >= 1");
    if (!(radius > 0.0)) throw ValidationError("probe radius must be positive");
    ProbeReport report;
    report.n_probes = n_probes;
    report.radius = radius;
    const int d = problem.dim_state;
    const auto stride = static_cast<std::uint64_t>(d + 1);
    for (std::size_t i = 0; i < n_probes; ++i) {
        const GaussianStream stream(seed, i, StreamDomain::probe);
        const VectorD x1 = detail::ball_point(stream, 0, d, radius);
        const VectorD x2 = detail::ball_point(stream, stride, d, radius);
        const VectorD y1 = detail::ball_point(stream, 2 * stride, d, radius);
        const VectorD y2 = detail::ball_point(stream, 3 * stride, d, radius);

        const double dx2 = (x1 - x2).squaredNorm();
        const double dy2 = (y1 - y2).squaredNorm();
        const double monotone = (x1 - x2).dot(problem.drift(x1, y1) - problem.drift(x2, y1)) + params.lambda1 * dx2;
        const double muy = (problem.drift(x1, y1) - problem.drift(x1, y2)).squaredNorm() - params.lambda2 * dy2;
        const double sigma =
            (problem.diffusion(x1, y1) - problem.diffusion(x2, y2)).squaredNorm() - params.lambda3 * (dx2 + dy2);
        detail::record(report.monotone, monotone, report.tolerance);
        detail::record(report.muy, muy, report.tolerance);
        detail::record(report.sigma, sigma, report.tolerance);
    }
    return report;
}

}  // namespace sdepca
