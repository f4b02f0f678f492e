#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdepca/brownian.hpp"
#include "sdepca/integrators.hpp"
#include "sdepca/linear_analytic.hpp"
#include "sdepca/model.hpp"
#include "sdepca/parallel.hpp"

namespace sdepca {

/// Bounded smooth test functions φ of ‖x‖.
enum class TestFunction {
    sin_sq,        // sin(‖x‖²)
    cos_abs,       // cos(‖x‖)
    atan_abs,      // arctan(‖x‖)
    exp_neg_sq,    // e^{-‖x‖²}
    atan_sq,       // arctan(‖x‖²)
    sin_sq_shift,  // sin(‖x‖² + π/2)
};

std::string to_string(TestFunction phi);
TestFunction parse_test_function(const std::string& name);
std::vector<TestFunction> all_test_functions();

template <typename Derived>
double evaluate(TestFunction phi, const Eigen::MatrixBase<Derived>& x) {
    const double sq = x.squaredNorm();
    switch (phi) {
        case TestFunction::sin_sq: return std::sin(sq);
        case TestFunction::cos_abs: return std::cos(std::sqrt(sq));
        case TestFunction::atan_abs: return std::atan(std::sqrt(sq));
        case TestFunction::exp_neg_sq: return std::exp(-sq);
        case TestFunction::atan_sq: return std::atan(sq);
        case TestFunction::sin_sq_shift: return std::sin(sq + M_PI / 2.0);
    }
    return 0.0;
}

/// Shared Monte Carlo controls. Results depend on `master_seed` only;
/// `threads` changes wall time, never output.
struct McOptions {
    std::uint64_t master_seed = 0;
    int threads = 1;
    /// Largest tolerated fraction of failed paths before the estimate aborts.
    double failure_budget = 0.001;
};

/// Normal quantile for the 95% two-sided confidence intervals.
inline constexpr double kCiQuantile = 1.96;

struct OrderFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares of ln(error) on ln(δ). Needs ≥ 2 points, all positive.
OrderFit fit_order(std::span<const double> deltas, std::span<const double> errors);

// ---------------------------------------------------------------- weak error

/// Maps a fine Brownian grid to the reference solution X(T).
using ReferenceSampler = std::function<VectorD(const BrownianGrid&, std::int64_t T)>;

/// Exact linear solution evaluated by fine-grid quadrature on the same path.
ReferenceSampler exact_linear_reference(const LinearAdditiveParams<double>& params);

/// Split-step backward Euler run at the grid's own fine step.
ReferenceSampler ssbe_reference(const Problem<double>& problem, const BeConfig& base = {});

struct WeakErrorSettings {
    std::vector<double> deltas;
    std::size_t n_paths = 1000;
    std::int64_t T = 5;
    double fine_step = 0x1.0p-11;
    BeConfig base;  // Newton settings; m is taken from each δ
};

struct WeakErrorReport {
    TestFunction phi = TestFunction::sin_sq;
    std::vector<double> deltas;
    std::vector<double> errors;            // Ê|φ(X(T)) - φ(Y_T)|
    std::vector<double> half_widths;       // 95% CI half-widths of `errors`
    std::vector<double> secondary_errors;  // |Êφ(X(T)) - Êφ(Y_T)|
    std::size_t n_paths = 0;
    std::size_t n_failed = 0;
    bool slope_defined = false;
    double fitted_slope = std::nan("");
    double fitted_intercept = std::nan("");
};

/// Coupled-path weak errors: every δ and the reference see coarsenings of
/// the same fine path, one path per index.
std::vector<WeakErrorReport> estimate_weak_errors(const Problem<double>& problem, const ReferenceSampler& reference,
                                                  const WeakErrorSettings& settings,
                                                  std::span<const TestFunction> phis, const McOptions& options);

WeakErrorReport estimate_weak_error(const Problem<double>& problem, const ReferenceSampler& reference,
                                    const WeakErrorSettings& settings, TestFunction phi, const McOptions& options);

/// Builds a report (errors, CI, fit) from per-path absolute differences and
/// the two per-path φ values. Rows are paths, columns step sizes.
WeakErrorReport summarize_weak_error(TestFunction phi, std::span<const double> deltas,
                                     const Eigen::MatrixXd& abs_diff, const Eigen::VectorXd& phi_reference,
                                     const Eigen::MatrixXd& phi_numeric, std::size_t n_failed);

// --------------------------------------------------------------- ergodicity

struct ErgodicityReport {
    TestFunction phi = TestFunction::atan_abs;
    std::vector<VectorD> initials;
    Eigen::MatrixXd traces;      // initials × (K+1): Êφ(Y_k^{0,x_i})
    Eigen::MatrixXd std_errors;  // same shape
    Eigen::VectorXd spread;      // max_{i,j} |trace_i(k) - trace_j(k)|
    Eigen::VectorXd pooled_se;   // sqrt(mean_i se_i(k)²)
    std::size_t n_paths = 0;
};

/// Backward Euler chains from each initial value, all driven by the same
/// Brownian paths (path index p shared across initials).
std::vector<ErgodicityReport> ergodic_mean_traces(const Problem<double>& problem, const BeConfig& cfg,
                                                  const std::vector<VectorD>& initials, std::int64_t K,
                                                  std::size_t n_paths, std::span<const TestFunction> phis,
                                                  const McOptions& options);

ErgodicityReport ergodic_mean_trace(const Problem<double>& problem, const BeConfig& cfg,
                                    const std::vector<VectorD>& initials, std::int64_t K, std::size_t n_paths,
                                    TestFunction phi, const McOptions& options);

/// (1/K) Σ_{k<K} φ(Y_k) over the K = blocks() leading anchors.
template <typename Scalar, typename Fn>
double time_average(const Trajectory<Scalar>& traj, const Fn& phi) {
    const std::int64_t K = traj.blocks();
    if (K < 1) throw ValidationError("time average needs at least one complete block");
    KahanSum sum;
    for (std::int64_t k = 0; k < K; ++k) sum.add(static_cast<double>(phi(traj.anchor(k))));
    return sum.value() / static_cast<double>(K);
}

template <typename Scalar>
double time_average(const Trajectory<Scalar>& traj, TestFunction phi) {
    return time_average(traj, [phi](const Vector<Scalar>& v) { return evaluate(phi, v.template cast<double>()); });
}

// -------------------------------------------------------------- contraction

struct ContractionReport {
    VectorD x;
    VectorD y;
    std::size_t n_paths = 0;
    Eigen::VectorXd mean_sq_diff;  // Ê‖Y_k^x - Y_k^y‖², k = 0..K
    Eigen::VectorXd std_errors;
    Eigen::VectorXd decay_factor;  // (D_k / D_0)^{1/k}; entry 0 is NaN
    double fitted_rate = std::nan("");          // slope of ln D_k against k
    double fitted_decay_factor = std::nan("");  // exp(fitted_rate)
    std::optional<double> rbar1_block;          // analytic r̄₁(m-1)
    /// decay_factor[k] ≤ r̄₁(m-1)·(1 + 3·relative SE of decay_factor[k]) for all k ≥ 1.
    std::optional<bool> within_bound;
};

/// Coupled backward Euler chains from x and y on identical grids.
ContractionReport contraction_estimate(const Problem<double>& problem, const BeConfig& cfg, const VectorD& x,
                                       const VectorD& y, std::size_t n_paths, std::int64_t K,
                                       const McOptions& options,
                                       const std::optional<DissipativityParams<double>>& params = std::nullopt);

// ------------------------------------------------------------------ moments

struct MomentReport {
    int p = 1;
    std::size_t n_paths = 0;
    std::size_t n_nonfinite = 0;
    Eigen::VectorXd moments;      // Ê‖Y_k‖^{2p}, k = 0..K
    Eigen::VectorXd half_widths;  // 95% CI
    /// Strictly increasing over the last ⌈K/2⌉ anchors by more than the
    /// combined CI half-widths at the window ends.
    bool growth_flag = false;
    std::optional<bool> condition_holds;
};

MomentReport moment_estimate(const Problem<double>& problem, const BeConfig& cfg, int p, std::size_t n_paths,
                             std::int64_t K, const McOptions& options,
                             const std::optional<DissipativityParams<double>>& params = std::nullopt);

/// The unbounded-growth rule of MomentReport::growth_flag.
bool detect_growth(const Eigen::VectorXd& moments, const Eigen::VectorXd& half_widths);

// ----------------------------------------------------- recursion inequality

struct RecursionCheck {
    bool hypothesis_holds = true;
    std::optional<std::size_t> first_hypothesis_violation;
    bool conclusion_holds = true;
    std::optional<std::size_t> first_conclusion_violation;

    /// The conclusion held wherever the hypothesis held.
    bool ok() const noexcept { return conclusion_holds; }
};

/// For z indexed n = km + l, checks the hypothesis
///   z_{n+1} ≤ (1 - αδ) z_n + βδ z_{km} + γδ
/// at every step and, where it holds along a block, the conclusion
///   z_{km+l+1} ≤ (β/α + (1 - β/α) e^{-α(l+1)δ}) z_{km} + γ/α.
/// Violation indices are those of the offending z_{n+1}.
RecursionCheck check_recursion_bound(std::span<const double> z, double alpha, double beta, double gamma,
                                     double delta, int m);

}  // namespace sdepca
