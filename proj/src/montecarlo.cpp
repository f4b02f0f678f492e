#include "sdepca/montecarlo.hpp"

#include <algorithm>
#include <limits>

#include "sdepca/parallel.hpp"

namespace sdepca {
namespace {

struct PathStatus {
    bool failed = false;
    std::string code;
    std::string detail;
};

// Throws when failures exceed the budget; returns the failure count otherwise.
std::size_t enforce_failure_budget(const std::vector<PathStatus>& status, const McOptions& options,
                                   const std::string& what) {
    std::size_t n_failed = 0;
    const PathStatus* first = nullptr;
    for (const auto& s : status) {
        if (s.failed) {
            ++n_failed;
            if (!first) first = &s;
        }
    }
    const double allowed = options.failure_budget * static_cast<double>(status.size());
    if (n_failed > 0 && static_cast<double>(n_failed) > allowed) {
        throw PathFailureError(what + ": " + std::to_string(n_failed) + " of " + std::to_string(status.size()) +
                                   " paths failed; first: " + first->code + " " + first->detail,
                               n_failed);
    }
    return n_failed;
}

template <typename Fn>
std::vector<PathStatus> run_paths(std::size_t n_paths, const McOptions& options, const Fn& body) {
    std::vector<PathStatus> status(n_paths);
    parallel_for(n_paths, options.threads, [&](std::size_t p) {
        try {
            body(p);
        } catch (const NumericalError& e) {
            status[p] = {true, e.code(), e.describe()};
        }
    });
    return status;
}

struct MeanSe {
    double mean;
    double se;
};

// Mean and standard error over the non-failed entries, in index order.
template <typename Get>
MeanSe mean_and_se(std::size_t n, const std::vector<PathStatus>& status, const Get& get) {
    KahanSum sum;
    std::size_t count = 0;
    for (std::size_t p = 0; p < n; ++p) {
        if (status[p].failed) continue;
        sum.add(get(p));
        ++count;
    }
    if (count == 0) return {std::nan(""), std::nan("")};
    const double mean = sum.value() / static_cast<double>(count);
    KahanSum sq;
    for (std::size_t p = 0; p < n; ++p) {
        if (status[p].failed) continue;
        const double d = get(p) - mean;
        sq.add(d * d);
    }
    const double var = count > 1 ? sq.value() / static_cast<double>(count - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(count))};
}

std::vector<PathStatus> no_failures(std::size_t n) { return std::vector<PathStatus>(n); }

}  // namespace

std::string to_string(TestFunction phi) {
    switch (phi) {
        case TestFunction::sin_sq: return "sin_sq";
        case TestFunction::cos_abs: return "cos_abs";
        case TestFunction::atan_abs: return "atan_abs";
        case TestFunction::exp_neg_sq: return "exp_neg_sq";
        case TestFunction::atan_sq: return "atan_sq";
        case TestFunction::sin_sq_shift: return "sin_sq_shift";
    }
    return "unknown";
}

std::vector<TestFunction> all_test_functions() {
    return {TestFunction::sin_sq,     TestFunction::cos_abs, TestFunction::atan_abs,
            TestFunction::exp_neg_sq, TestFunction::atan_sq, TestFunction::sin_sq_shift};
}

TestFunction parse_test_function(const std::string& name) {
    for (TestFunction phi : all_test_functions()) {
        if (to_string(phi) == name) return phi;
    }
    throw ValidationError("unknown test function '" + name + "'");
}

OrderFit fit_order(std::span<const double> deltas, std::span<const double> errors) {
    if (deltas.size() != errors.size()) throw ValidationError("fit_order: length mismatch");
    if (deltas.size() < 2) throw ValidationError("fit_order needs at least two points");
    const std::size_t n = deltas.size();
    Eigen::VectorXd lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(deltas[i] > 0.0) || !(errors[i] > 0.0)) {
            throw ValidationError("fit_order needs strictly positive step sizes and errors");
        }
        lx[i] = std::log(deltas[i]);
        ly[i] = std::log(errors[i]);
    }
    const double mx = lx.mean(), my = ly.mean();
    const double sxx = (lx.array() - mx).square().sum();
    if (!(sxx > 0.0)) throw ValidationError("fit_order needs at least two distinct step sizes");
    const double sxy = ((lx.array() - mx) * (ly.array() - my)).sum();
    OrderFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

ReferenceSampler exact_linear_reference(const LinearAdditiveParams<double>& params) {
    validate(params);
    return [params](const BrownianGrid& grid, std::int64_t T) {
        return VectorD(exact_sample_path(params, grid, T).final_state());
    };
}

ReferenceSampler ssbe_reference(const Problem<double>& problem, const BeConfig& base) {
    return [problem, base](const BrownianGrid& grid, std::int64_t T) {
        const BeConfig cfg = config_for_step(grid.fine_step(), base);
        return VectorD(simulate(Scheme::split_step_backward_euler, problem, cfg, grid.path(), T, grid.path_index())
                           .final_state());
    };
}

WeakErrorReport summarize_weak_error(TestFunction phi, std::span<const double> deltas,
                                     const Eigen::MatrixXd& abs_diff, const Eigen::VectorXd& phi_reference,
                                     const Eigen::MatrixXd& phi_numeric, std::size_t n_failed) {
    const auto n = static_cast<std::size_t>(abs_diff.rows());
    std::vector<PathStatus> status = no_failures(n);
    // Failed paths are marked by NaN rows.
    for (std::size_t p = 0; p < n; ++p) status[p].failed = std::isnan(phi_reference[static_cast<Eigen::Index>(p)]);

    WeakErrorReport report;
    report.phi = phi;
    report.deltas.assign(deltas.begin(), deltas.end());
    report.n_paths = n;
    report.n_failed = n_failed;
    const MeanSe ref = mean_and_se(n, status, [&](std::size_t p) { return phi_reference[static_cast<Eigen::Index>(p)]; });
    for (std::size_t j = 0; j < deltas.size(); ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        const MeanSe e = mean_and_se(n, status, [&](std::size_t p) { return abs_diff(static_cast<Eigen::Index>(p), c); });
        const MeanSe num = mean_and_se(n, status, [&](std::size_t p) { return phi_numeric(static_cast<Eigen::Index>(p), c); });
        report.errors.push_back(e.mean);
        report.half_widths.push_back(kCiQuantile * e.se);
        report.secondary_errors.push_back(std::abs(ref.mean - num.mean));
    }
    const bool fittable = report.errors.size() >= 2 &&
                          std::all_of(report.errors.begin(), report.errors.end(), [](double v) { return v > 0.0; });
    if (fittable) {
        const OrderFit fit = fit_order(report.deltas, report.errors);
        report.slope_defined = true;
        report.fitted_slope = fit.slope;
        report.fitted_intercept = fit.intercept;
    }
    return report;
}

std::vector<WeakErrorReport> estimate_weak_errors(const Problem<double>& problem, const ReferenceSampler& reference,
                                                  const WeakErrorSettings& settings,
                                                  std::span<const TestFunction> phis, const McOptions& options) {
    validate(problem);
    if (settings.deltas.empty()) throw ValidationError("weak error needs at least one step size");
    if (settings.n_paths < 1) throw ValidationError("weak error needs at least one path");
    if (settings.T < 1) throw ValidationError("horizon T must be a positive integer");
    if (phis.empty()) throw ValidationError("weak error needs at least one test function");
    if (!is_dyadic_step(settings.fine_step)) throw ValidationError("fine step must be 2^-k");
    std::vector<BeConfig> configs;
    std::vector<std::int64_t> factors;
    for (double delta : settings.deltas) {
        configs.push_back(config_for_step(delta, settings.base));
        if (delta < settings.fine_step) throw ValidationError("step sizes must not be finer than the reference step");
        factors.push_back(exact_step_count(delta, settings.fine_step));
    }

    const std::size_t n = settings.n_paths;
    const std::size_t nd = settings.deltas.size();
    const std::size_t nphi = phis.size();
    const auto rows = static_cast<Eigen::Index>(n);
    // Per phi: reference value per path, numeric value per (path, δ).
    std::vector<Eigen::VectorXd> ref_values(nphi, Eigen::VectorXd::Constant(rows, std::nan("")));
    std::vector<Eigen::MatrixXd> num_values(nphi, Eigen::MatrixXd::Constant(rows, static_cast<Eigen::Index>(nd), std::nan("")));

    const auto status = run_paths(n, options, [&](std::size_t p) {
        const BrownianGrid grid =
            generate_path(options.master_seed, p, static_cast<double>(settings.T), settings.fine_step, problem.dim_noise);
        const VectorD x_ref = reference(grid, settings.T);
        std::vector<VectorD> y(nd);
        for (std::size_t j = 0; j < nd; ++j) {
            y[j] = simulate(Scheme::backward_euler, problem, configs[j], coarsen(grid, factors[j]), settings.T, p)
                       .final_state();
        }
        const auto row = static_cast<Eigen::Index>(p);
        for (std::size_t f = 0; f < nphi; ++f) {
            ref_values[f][row] = evaluate(phis[f], x_ref);
            for (std::size_t j = 0; j < nd; ++j) num_values[f](row, static_cast<Eigen::Index>(j)) = evaluate(phis[f], y[j]);
        }
    });
    const std::size_t n_failed = enforce_failure_budget(status, options, "weak error");

    std::vector<WeakErrorReport> reports;
    for (std::size_t f = 0; f < nphi; ++f) {
        Eigen::MatrixXd abs_diff = (num_values[f].colwise() - ref_values[f]).cwiseAbs();
        for (std::size_t p = 0; p < n; ++p) {
            if (status[p].failed) ref_values[f][static_cast<Eigen::Index>(p)] = std::nan("");
        }
        reports.push_back(summarize_weak_error(phis[f], settings.deltas, abs_diff, ref_values[f], num_values[f], n_failed));
    }
    return reports;
}

WeakErrorReport estimate_weak_error(const Problem<double>& problem, const ReferenceSampler& reference,
                                    const WeakErrorSettings& settings, TestFunction phi, const McOptions& options) {
    const TestFunction one[] = {phi};
    return estimate_weak_errors(problem, reference, settings, one, options).front();
}

std::vector<ErgodicityReport> ergodic_mean_traces(const Problem<double>& problem, const BeConfig& cfg,
                                                  const std::vector<VectorD>& initials, std::int64_t K,
                                                  std::size_t n_paths, std::span<const TestFunction> phis,
                                                  const McOptions& options) {
    validate(problem);
    validate(cfg);
    if (initials.empty()) throw ValidationError("ergodicity trace needs at least one initial value");
    if (K < 0) throw ValidationError("K must be nonnegative");
    if (n_paths < 1) throw ValidationError("ergodicity trace needs at least one path");
    for (const auto& x : initials) {
        if (x.size() != problem.dim_state || !x.allFinite()) throw ValidationError("initial values must be finite d-vectors");
    }
    const std::size_t ni = initials.size();
    const std::size_t nphi = phis.size();
    const auto kk = static_cast<Eigen::Index>(K + 1);
    // values[p](f * ni + i, k)
    std::vector<Eigen::MatrixXd> values(n_paths);

    const auto status = run_paths(n_paths, options, [&](std::size_t p) {
        Eigen::MatrixXd v(static_cast<Eigen::Index>(nphi * ni), kk);
        if (K == 0) {
            for (std::size_t i = 0; i < ni; ++i) {
                for (std::size_t f = 0; f < nphi; ++f) v(static_cast<Eigen::Index>(f * ni + i), 0) = evaluate(phis[f], initials[i]);
            }
        } else {
            const BrownianGrid grid = generate_path(options.master_seed, p, static_cast<double>(K), cfg.delta(), problem.dim_noise);
            for (std::size_t i = 0; i < ni; ++i) {
                const auto traj = simulate(Scheme::backward_euler, problem.with_initial_state(initials[i]), cfg, grid.path(), K, p);
                for (std::int64_t k = 0; k <= K; ++k) {
                    const VectorD a = traj.anchor(k);
                    for (std::size_t f = 0; f < nphi; ++f) v(static_cast<Eigen::Index>(f * ni + i), k) = evaluate(phis[f], a);
                }
            }
        }
        values[p] = std::move(v);
    });
    enforce_failure_budget(status, options, "ergodicity trace");

    std::vector<ErgodicityReport> reports;
    for (std::size_t f = 0; f < nphi; ++f) {
        ErgodicityReport r;
        r.phi = phis[f];
        r.initials = initials;
        r.n_paths = n_paths;
        r.traces.resize(static_cast<Eigen::Index>(ni), kk);
        r.std_errors.resize(static_cast<Eigen::Index>(ni), kk);
        r.spread.resize(kk);
        r.pooled_se.resize(kk);
        for (Eigen::Index k = 0; k < kk; ++k) {
            for (std::size_t i = 0; i < ni; ++i) {
                const auto row = static_cast<Eigen::Index>(f * ni + i);
                const MeanSe ms = mean_and_se(n_paths, status, [&](std::size_t p) { return values[p](row, k); });
                r.traces(static_cast<Eigen::Index>(i), k) = ms.mean;
                r.std_errors(static_cast<Eigen::Index>(i), k) = ms.se;
            }
            r.spread[k] = r.traces.col(k).maxCoeff() - r.traces.col(k).minCoeff();
            r.pooled_se[k] = std::sqrt(r.std_errors.col(k).squaredNorm() / static_cast<double>(ni));
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

ErgodicityReport ergodic_mean_trace(const Problem<double>& problem, const BeConfig& cfg,
                                    const std::vector<VectorD>& initials, std::int64_t K, std::size_t n_paths,
                                    TestFunction phi, const McOptions& options) {
    const TestFunction one[] = {phi};
    return ergodic_mean_traces(problem, cfg, initials, K, n_paths, one, options).front();
}

ContractionReport contraction_estimate(const Problem<double>& problem, const BeConfig& cfg, const VectorD& x,
                                       const VectorD& y, std::size_t n_paths, std::int64_t K,
                                       const McOptions& options,
                                       const std::optional<DissipativityParams<double>>& params) {
    validate(problem);
    validate(cfg);
    if (x.size() != problem.dim_state || y.size() != problem.dim_state) throw ValidationError("initial values must be d-vectors");
    if (x == y) throw ValidationError("contraction estimate needs x != y");
    if (K < 1) throw ValidationError("contraction estimate needs K >= 1");
    if (n_paths < 1) throw ValidationError("contraction estimate needs at least one path");
    const auto kk = static_cast<Eigen::Index>(K + 1);
    Eigen::MatrixXd sq(static_cast<Eigen::Index>(n_paths), kk);

    const auto status = run_paths(n_paths, options, [&](std::size_t p) {
        const BrownianGrid grid = generate_path(options.master_seed, p, static_cast<double>(K), cfg.delta(), problem.dim_noise);
        const auto tx = simulate(Scheme::backward_euler, problem.with_initial_state(x), cfg, grid.path(), K, p);
        const auto ty = simulate(Scheme::backward_euler, problem.with_initial_state(y), cfg, grid.path(), K, p);
        for (std::int64_t k = 0; k <= K; ++k) sq(static_cast<Eigen::Index>(p), k) = (tx.anchor(k) - ty.anchor(k)).squaredNorm();
    });
    enforce_failure_budget(status, options, "contraction estimate");

    ContractionReport r;
    r.x = x;
    r.y = y;
    r.n_paths = n_paths;
    r.mean_sq_diff.resize(kk);
    r.std_errors.resize(kk);
    r.decay_factor = Eigen::VectorXd::Constant(kk, std::nan(""));
    for (Eigen::Index k = 0; k < kk; ++k) {
        const MeanSe ms = mean_and_se(n_paths, status, [&](std::size_t p) { return sq(static_cast<Eigen::Index>(p), k); });
        r.mean_sq_diff[k] = ms.mean;
        r.std_errors[k] = ms.se;
    }
    const double d0 = r.mean_sq_diff[0];
    std::vector<double> ks, logs;
    for (Eigen::Index k = 0; k < kk; ++k) {
        if (k > 0) r.decay_factor[k] = std::pow(r.mean_sq_diff[k] / d0, 1.0 / static_cast<double>(k));
        if (r.mean_sq_diff[k] > 0.0) {
            ks.push_back(static_cast<double>(k));
            logs.push_back(std::log(r.mean_sq_diff[k]));
        }
    }
    if (ks.size() >= 2) {
        const Eigen::Map<const Eigen::VectorXd> kv(ks.data(), static_cast<Eigen::Index>(ks.size()));
        const Eigen::Map<const Eigen::VectorXd> lv(logs.data(), static_cast<Eigen::Index>(logs.size()));
        const double mk = kv.mean(), ml = lv.mean();
        r.fitted_rate = ((kv.array() - mk) * (lv.array() - ml)).sum() / (kv.array() - mk).square().sum();
        r.fitted_decay_factor = std::exp(r.fitted_rate);
    }
    if (params && check_ergodicity_condition(*params)) {
        const double rbar = contraction_rates(*params, cfg.delta(), cfg.m).rbar1_block;
        r.rbar1_block = rbar;
        bool ok = true;
        for (Eigen::Index k = 1; k < kk; ++k) {
            const double dk = r.mean_sq_diff[k];
            if (dk == 0.0) continue;
            // Delta method: relative SE of (D_k / D_0)^{1/k} is relSE(D_k) / k.
            const double rel_se = (r.std_errors[k] / dk) / static_cast<double>(k);
            if (!(r.decay_factor[k] <= rbar * (1.0 + 3.0 * rel_se))) ok = false;
        }
        r.within_bound = ok;
    }
    return r;
}

bool detect_growth(const Eigen::VectorXd& moments, const Eigen::VectorXd& half_widths) {
    const Eigen::Index K = moments.size() - 1;
    if (K < 2) return false;
    const Eigen::Index window = std::max<Eigen::Index>(1, (K + 1) / 2);
    const Eigen::Index start = K - window;
    for (Eigen::Index k = start; k < K; ++k) {
        if (!(moments[k + 1] > moments[k])) return false;
    }
    return moments[K] - moments[start] > half_widths[K] + half_widths[start];
}

MomentReport moment_estimate(const Problem<double>& problem, const BeConfig& cfg, int p, std::size_t n_paths,
                             std::int64_t K, const McOptions& options,
                             const std::optional<DissipativityParams<double>>& params) {
    validate(problem);
    validate(cfg);
    if (p < 1) throw ValidationError("moment order p must be >= 1");
    if (K < 0) throw ValidationError("K must be nonnegative");
    if (n_paths < 1) throw ValidationError("moment estimate needs at least one path");
    const auto kk = static_cast<Eigen::Index>(K + 1);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n_paths), kk);

    const auto status = run_paths(n_paths, options, [&](std::size_t path) {
        const auto row = static_cast<Eigen::Index>(path);
        if (K == 0) {
            values(row, 0) = std::pow(problem.initial_state.squaredNorm(), p);
            return;
        }
        const BrownianGrid grid = generate_path(options.master_seed, path, static_cast<double>(K), cfg.delta(), problem.dim_noise);
        const auto traj = simulate(Scheme::backward_euler, problem, cfg, grid.path(), K, path);
        for (std::int64_t k = 0; k <= K; ++k) values(row, k) = std::pow(traj.anchor(k).squaredNorm(), p);
    });

    MomentReport r;
    r.p = p;
    r.n_paths = n_paths;
    r.n_nonfinite = enforce_failure_budget(status, options, "moment estimate");
    r.moments.resize(kk);
    r.half_widths.resize(kk);
    for (Eigen::Index k = 0; k < kk; ++k) {
        const MeanSe ms = mean_and_se(n_paths, status, [&](std::size_t path) { return values(static_cast<Eigen::Index>(path), k); });
        r.moments[k] = ms.mean;
        r.half_widths[k] = kCiQuantile * ms.se;
    }
    r.growth_flag = detect_growth(r.moments, r.half_widths);
    if (params) r.condition_holds = check_moment_condition(*params, p);
    return r;
}

RecursionCheck check_recursion_bound(std::span<const double> z, double alpha, double beta, double gamma,
                                     double delta, int m) {
    if (m < 1 || !(delta > 0.0)) throw ValidationError("recursion check needs m >= 1 and delta > 0");
    if (!(1.0 - alpha * delta > 0.0)) throw ValidationError("recursion check needs 1 - alpha*delta > 0");
    if (!(alpha > beta) || !(beta > 0.0) || !(gamma > 0.0)) {
        throw ValidationError("recursion check needs alpha > beta > 0 and gamma > 0");
    }
    for (double v : z) {
        if (!(v >= 0.0)) throw ValidationError("recursion check needs a nonnegative sequence");
    }
    // Relative slack for rounding in the comparisons.
    constexpr double kSlack = 1e-12;
    auto leq = [](double lhs, double rhs) { return lhs <= rhs + kSlack * (1.0 + std::abs(rhs)); };

    RecursionCheck result;
    const double ratio = beta / alpha;
    bool block_ok = true;
    for (std::size_t n = 0; n + 1 < z.size(); ++n) {
        const std::size_t k = n / static_cast<std::size_t>(m);
        const std::size_t l = n % static_cast<std::size_t>(m);
        if (l == 0) block_ok = true;
        const double anchor = z[k * static_cast<std::size_t>(m)];
        const double hyp_rhs = (1.0 - alpha * delta) * z[n] + beta * delta * anchor + gamma * delta;
        if (!leq(z[n + 1], hyp_rhs)) {
            block_ok = false;
            if (result.hypothesis_holds) {
                result.hypothesis_holds = false;
                result.first_hypothesis_violation = n + 1;
            }
        }
        if (!block_ok) continue;
        const double bound =
            (ratio + (1.0 - ratio) * std::exp(-alpha * static_cast<double>(l + 1) * delta)) * anchor + gamma / alpha;
        if (!leq(z[n + 1], bound) && result.conclusion_holds) {
            result.conclusion_holds = false;
            result.first_conclusion_violation = n + 1;
        }
    }
    return result;
}

}  // namespace sdepca
