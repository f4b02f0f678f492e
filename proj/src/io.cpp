#include "sdepca/io.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <ostream>

namespace sdepca {
namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json state_json(const VectorD& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json matrix_rows_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
    return out;
}

json optional_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json inequality_json(const InequalityProbe& p) {
    return json{{"violations", p.violations}, {"worst_margin", p.worst_margin}};
}

}  // namespace

std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void write_trajectory_csv(std::ostream& out, const Trajectory<double>& traj) {
    out << "t";
    for (int i = 0; i < traj.dim(); ++i) out << ",x_" << i;
    out << '\n';
    for (Eigen::Index n = 0; n < traj.states.cols(); ++n) {
        out << format_double(traj.time(n));
        for (int i = 0; i < traj.dim(); ++i) out << ',' << format_double(traj.states(i, n));
        out << '\n';
    }
}

void write_weak_error_csv(std::ostream& out, const WeakErrorReport& report) {
    out << "delta,error,ci_half_width\n";
    for (std::size_t j = 0; j < report.deltas.size(); ++j) {
        out << format_double(report.deltas[j]) << ',' << format_double(report.errors[j]) << ','
            << format_double(report.half_widths[j]) << '\n';
    }
}

void write_ergodicity_csv(std::ostream& out, const ErgodicityReport& report) {
    out << "k";
    for (Eigen::Index i = 0; i < report.traces.rows(); ++i) out << ",trace_" << i;
    out << ",spread\n";
    for (Eigen::Index k = 0; k < report.traces.cols(); ++k) {
        out << k;
        for (Eigen::Index i = 0; i < report.traces.rows(); ++i) out << ',' << format_double(report.traces(i, k));
        out << ',' << format_double(report.spread[k]) << '\n';
    }
}

void write_contraction_csv(std::ostream& out, const ContractionReport& report) {
    out << "k,mean_sq_diff,std_error,decay_factor\n";
    for (Eigen::Index k = 0; k < report.mean_sq_diff.size(); ++k) {
        out << k << ',' << format_double(report.mean_sq_diff[k]) << ',' << format_double(report.std_errors[k]) << ','
            << format_double(report.decay_factor[k]) << '\n';
    }
}

void write_moment_csv(std::ostream& out, const MomentReport& report) {
    out << "k,moment,ci_half_width\n";
    for (Eigen::Index k = 0; k < report.moments.size(); ++k) {
        out << k << ',' << format_double(report.moments[k]) << ',' << format_double(report.half_widths[k]) << '\n';
    }
}

void to_json(nlohmann::json& j, const Trajectory<double>& traj) {
    json t = json::array();
    json x = json::array();
    for (Eigen::Index n = 0; n < traj.states.cols(); ++n) {
        t.push_back(traj.time(n));
        x.push_back(state_json(traj.state(n)));
    }
    j = json{{"problem", traj.problem_tag}, {"m", traj.m}, {"path_index", traj.path_index}, {"t", t}, {"x", x}};
}

void to_json(nlohmann::json& j, const WeakErrorReport& r) {
    j = json{{"phi", to_string(r.phi)},
             {"deltas", r.deltas},
             {"errors", r.errors},
             {"half_widths", r.half_widths},
             {"secondary_errors", r.secondary_errors},
             {"n_paths", r.n_paths},
             {"n_failed", r.n_failed},
             {"slope_defined", r.slope_defined},
             {"fitted_slope", optional_number(r.fitted_slope)},
             {"fitted_intercept", optional_number(r.fitted_intercept)}};
}

void to_json(nlohmann::json& j, const ErgodicityReport& r) {
    json initials = json::array();
    for (const auto& x : r.initials) initials.push_back(state_json(x));
    j = json{{"phi", to_string(r.phi)},
             {"initials", initials},
             {"traces", matrix_rows_json(r.traces)},
             {"std_errors", matrix_rows_json(r.std_errors)},
             {"spread", vector_json(r.spread)},
             {"pooled_se", vector_json(r.pooled_se)},
             {"n_paths", r.n_paths}};
}

void to_json(nlohmann::json& j, const ContractionReport& r) {
    json decay = json::array();
    for (Eigen::Index k = 0; k < r.decay_factor.size(); ++k) decay.push_back(optional_number(r.decay_factor[k]));
    j = json{{"x", state_json(r.x)},
             {"y", state_json(r.y)},
             {"n_paths", r.n_paths},
             {"mean_sq_diff", vector_json(r.mean_sq_diff)},
             {"std_errors", vector_json(r.std_errors)},
             {"decay_factor", decay},
             {"fitted_rate", optional_number(r.fitted_rate)},
             {"fitted_decay_factor", optional_number(r.fitted_decay_factor)},
             {"rbar1_block", r.rbar1_block ? json(*r.rbar1_block) : json(nullptr)},
             {"within_bound", r.within_bound ? json(*r.within_bound) : json(nullptr)}};
}

void to_json(nlohmann::json& j, const MomentReport& r) {
    j = json{{"p", r.p},
             {"n_paths", r.n_paths},
             {"n_nonfinite", r.n_nonfinite},
             {"moments", vector_json(r.moments)},
             {"half_widths", vector_json(r.half_widths)},
             {"growth_flag", r.growth_flag},
             {"condition_holds", r.condition_holds ? json(*r.condition_holds) : json(nullptr)}};
}

void to_json(nlohmann::json& j, const ProbeReport& r) {
    j = json{{"n_probes", r.n_probes},
             {"radius", r.radius},
             {"tolerance", r.tolerance},
             {"monotone", inequality_json(r.monotone)},
             {"muy", inequality_json(r.muy)},
             {"sigma", inequality_json(r.sigma)},
             {"total_violations", r.total_violations()}};
}

void to_json(nlohmann::json& j, const ContractionRates<double>& r) {
    j = json{{"delta", r.delta},   {"m", r.m},           {"alpha", r.alpha},   {"beta", r.beta},
             {"gamma", r.gamma},   {"r_one", r.r_one},   {"rbar_one", r.rbar_one},
             {"alpha1", r.alpha1}, {"beta1", r.beta1},   {"gamma1", r.gamma1}, {"alpha2", r.alpha2},
             {"beta2", r.beta2},   {"rbar1_block", r.rbar1_block}};
}

void to_json(nlohmann::json& j, const DissipativityParams<double>& p) {
    j = json{{"lambda1", p.lambda1},
             {"lambda2", p.lambda2},
             {"lambda3", p.lambda3},
             {"f00_norm_sq", p.f00_norm_sq},
             {"g00_norm_sq", p.g00_norm_sq}};
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open output file " + path);
    out << content;
    if (!out) throw Error("io", "failed writing " + path);
}

}  // namespace sdepca
