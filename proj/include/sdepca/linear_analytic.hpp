#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sdepca/brownian.hpp"
#include "sdepca/errors.hpp"
#include "sdepca/integrators.hpp"
#include "sdepca/rng.hpp"

namespace sdepca {

/// dX(t) = (-θ₁X(t) + θ₂X([t])) dt + dB(t), X(0) = x0.
template <typename Scalar>
struct LinearAdditiveParams {
    Scalar theta1{};
    Scalar theta2{};
    Scalar x0{};
};

template <typename Scalar>
void validate(const LinearAdditiveParams<Scalar>& p) {
    if (!(p.theta1 > 0)) throw ValidationError("theta1 must be positive");
}

/// One-block law of the integer-time chain X(k+1) = μ(1) X(k) + N(0, σ(1)).
template <typename Scalar>
struct LinearLaw {
    Scalar mu_one{};
    Scalar sigma_one{};
    std::optional<Scalar> stationary_mean;
    std::optional<Scalar> stationary_variance;
};

/// μ(s) = θ₂/θ₁ + (1 - θ₂/θ₁) e^{-θ₁ s}: mean multiplier over a time s inside a block.
template <typename Scalar>
Scalar mean_multiplier(const LinearAdditiveParams<Scalar>& p, Scalar s) {
    using std::exp;
    const Scalar ratio = p.theta2 / p.theta1;
    return ratio + (Scalar(1) - ratio) * exp(-p.theta1 * s);
}

/// σ(s) = (1 - e^{-2θ₁ s}) / (2θ₁): variance of ∫₀ˢ e^{-θ₁(s-u)} dB(u).
template <typename Scalar>
Scalar noise_variance(const LinearAdditiveParams<Scalar>& p, Scalar s) {
    using std::expm1;
    return -expm1(Scalar(-2) * p.theta1 * s) / (Scalar(2) * p.theta1);
}

template <typename Scalar>
LinearLaw<Scalar> law(const LinearAdditiveParams<Scalar>& p) {
    using std::abs;
    validate(p);
    LinearLaw<Scalar> out;
    out.mu_one = mean_multiplier(p, Scalar(1));
    out.sigma_one = noise_variance(p, Scalar(1));
    if (abs(out.mu_one) < Scalar(1)) {
        out.stationary_mean = Scalar(0);
        out.stationary_variance = out.sigma_one / (Scalar(1) - out.mu_one * out.mu_one);
    }
    return out;
}

namespace detail {

// Σ_{i<k} μ^{2i} = (1 - μ^{2k}) / (1 - μ²), or k when |μ| = 1.
template <typename Scalar>
Scalar geometric_sum_sq(Scalar mu, std::int64_t k) {
    using std::pow;
    const Scalar mu_sq = mu * mu;
    if (mu_sq == Scalar(1)) return Scalar(k);
    return (Scalar(1) - pow(mu_sq, Scalar(k))) / (Scalar(1) - mu_sq);
}

template <typename Scalar>
std::pair<std::int64_t, Scalar> split_time(Scalar t) {
    using std::floor;
    if (!(t >= 0)) throw ValidationError("time must be nonnegative");
    const Scalar whole = floor(t);
    return {static_cast<std::int64_t>(whole), t - whole};
}

}  // namespace detail

/// E X(t) = x μ(1)^⌊t⌋ μ({t}).
template <typename Scalar>
Scalar exact_mean(const LinearAdditiveParams<Scalar>& p, Scalar t) {
    using std::pow;
    validate(p);
    const auto [k, frac] = detail::split_time(t);
    return p.x0 * pow(mean_multiplier(p, Scalar(1)), Scalar(k)) * mean_multiplier(p, frac);
}

/// Var X(t) = [(1 - μ(1)^{2k}) / (1 - μ(1)²)] σ(1) μ({t})² + σ({t}), k = ⌊t⌋.
///
/// Follows from X(t) = X(k) μ({t}) + ∫_k^t e^{-θ₁(t-s)} dB(s) with the
/// integral independent of X(k), and Var X(k+1) = μ(1)² Var X(k) + σ(1).
template <typename Scalar>
Scalar exact_variance(const LinearAdditiveParams<Scalar>& p, Scalar t) {
    validate(p);
    const auto [k, frac] = detail::split_time(t);
    const Scalar mu_frac = mean_multiplier(p, frac);
    const Scalar block = detail::geometric_sum_sq(mean_multiplier(p, Scalar(1)), k) * noise_variance(p, Scalar(1));
    return block * mu_frac * mu_frac + noise_variance(p, frac);
}

/// Open interval of θ₂ for which |μ(1)| < 1:
/// (-θ₁(1 + e^{-θ₁}) / (1 - e^{-θ₁}), θ₁).
template <typename Scalar>
std::pair<Scalar, Scalar> stationary_region(Scalar theta1) {
    using std::exp;
    if (!(theta1 > 0)) throw ValidationError("theta1 must be positive");
    const Scalar e = exp(-theta1);
    return {-theta1 * (Scalar(1) + e) / (Scalar(1) - e), theta1};
}

template <typename Scalar>
bool is_stationary(const LinearAdditiveParams<Scalar>& p) {
    const auto [lo, hi] = stationary_region(p.theta1);
    return p.theta2 > lo && p.theta2 < hi;
}

/// Zero-noise backward Euler block multiplier μ_δ(1) = ρᵐ + (θ₂/θ₁)(1 - ρᵐ),
/// ρ = 1/(1 + δθ₁): Y_{k+1} = μ_δ(1) Y_k + (noise terms).
template <typename Scalar>
Scalar be_mean_multiplier(const LinearAdditiveParams<Scalar>& p, int m) {
    using std::pow;
    validate(p);
    if (m < 1) throw ValidationError("m must be >= 1");
    const Scalar rho = Scalar(1) / (Scalar(1) + p.theta1 / Scalar(m));
    const Scalar rho_m = pow(rho, Scalar(m));
    return rho_m + (p.theta2 / p.theta1) * (Scalar(1) - rho_m);
}

/// Variance of the noise a backward Euler block adds, δ Σ_{j=1..m} ρ^{2j}
/// = δρ²(1 - ρ^{2m}) / (1 - ρ²).
template <typename Scalar>
Scalar be_block_noise_variance(const LinearAdditiveParams<Scalar>& p, int m) {
    using std::pow;
    validate(p);
    if (m < 1) throw ValidationError("m must be >= 1");
    const Scalar delta = Scalar(1) / Scalar(m);
    const Scalar rho = Scalar(1) / (Scalar(1) + delta * p.theta1);
    const Scalar rho_sq = rho * rho;
    return delta * rho_sq * (Scalar(1) - pow(rho_sq, Scalar(m))) / (Scalar(1) - rho_sq);
}

/// Stationary variance of the backward Euler anchor chain, when |μ_δ(1)| < 1.
template <typename Scalar>
std::optional<Scalar> be_stationary_variance(const LinearAdditiveParams<Scalar>& p, int m) {
    using std::abs;
    const Scalar mu = be_mean_multiplier(p, m);
    if (!(abs(mu) < Scalar(1))) return std::nullopt;
    return be_block_noise_variance(p, m) / (Scalar(1) - mu * mu);
}

/// Exact integer-time samples X(0..K) from given standard normals z[0..K-1]:
/// X(k+1) = μ(1) X(k) + sqrt(σ(1)) z_k.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> exact_sample_integer(const LinearAdditiveParams<Scalar>& p,
                                                               std::span<const double> standard_normals) {
    using std::sqrt;
    const LinearLaw<Scalar> l = law(p);
    const Scalar scale = sqrt(l.sigma_one);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x(static_cast<Eigen::Index>(standard_normals.size()) + 1);
    x[0] = p.x0;
    for (std::size_t k = 0; k < standard_normals.size(); ++k) {
        x[static_cast<Eigen::Index>(k) + 1] = l.mu_one * x[static_cast<Eigen::Index>(k)] + scale * Scalar(standard_normals[k]);
    }
    return x;
}

/// Exact integer-time samples driven by the counter-based stream
/// (master_seed, path_index) of the exact-sampler domain.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> exact_sample_integer(const LinearAdditiveParams<Scalar>& p,
                                                               std::uint64_t master_seed, std::uint64_t path_index,
                                                               std::int64_t K) {
    if (K < 0) throw ValidationError("K must be nonnegative");
    std::vector<double> z(static_cast<std::size_t>(K));
    GaussianStream(master_seed, path_index, StreamDomain::exact_integer).fill_normal(0, z);
    return exact_sample_integer(p, std::span<const double>(z));
}

/// The integer-time samples as a one-step-per-unit trajectory.
template <typename Scalar>
Trajectory<Scalar> exact_integer_trajectory(const LinearAdditiveParams<Scalar>& p, std::uint64_t master_seed,
                                            std::uint64_t path_index, std::int64_t K) {
    Trajectory<Scalar> traj;
    traj.m = 1;
    traj.problem_tag = "linear-additive";
    traj.path_index = path_index;
    traj.states = exact_sample_integer(p, master_seed, path_index, K).transpose();
    return traj;
}

/// Variation-of-constants solution on the fine grid of `grid`:
/// X(t) = X(k)[e^{-θ₁(t-k)} + (θ₂/θ₁)(1 - e^{-θ₁(t-k)})] + Σ_{t_i < t} e^{-θ₁(t - t_i)} ΔB_i,
/// the stochastic integral taken as a left-point sum over the same
/// increments the integrators consume.
template <typename Scalar>
Trajectory<Scalar> exact_sample_path(const LinearAdditiveParams<Scalar>& p, const BrownianGrid& grid, std::int64_t K) {
    using std::exp;
    validate(p);
    if (grid.dim_noise() != 1) throw ValidationError("linear additive problem needs scalar noise");
    const std::int64_t m = exact_step_count(1.0, grid.fine_step());
    if (K < 0 || K * m > grid.size()) throw ValidationError("Brownian grid too short for requested horizon");
    const Scalar h = Scalar(grid.fine_step());
    const Scalar decay = exp(-p.theta1 * h);

    std::vector<Scalar> mu_at(static_cast<std::size_t>(m) + 1);
    for (std::int64_t l = 0; l <= m; ++l) mu_at[static_cast<std::size_t>(l)] = mean_multiplier(p, Scalar(l) * h);

    Trajectory<Scalar> traj;
    traj.m = static_cast<int>(m);
    traj.problem_tag = "linear-additive";
    traj.path_index = grid.path_index();
    traj.states.resize(1, K * m + 1);
    traj.states(0, 0) = p.x0;
    const auto& dB = grid.increments();
    Scalar anchor = p.x0;
    for (std::int64_t k = 0; k < K; ++k) {
        Scalar integral(0);
        for (std::int64_t l = 0; l < m; ++l) {
            const std::int64_t n = k * m + l;
            integral = decay * (integral + Scalar(dB(0, n)));
            traj.states(0, n + 1) = anchor * mu_at[static_cast<std::size_t>(l + 1)] + integral;
        }
        anchor = traj.states(0, (k + 1) * m);
    }
    return traj;
}

}  // namespace sdepca
