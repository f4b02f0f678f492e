#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdepca/sdepca.hpp"

namespace sdepca::cli {
namespace {

using nlohmann::json;

const char* const kDefaultDeltas = "2^-6,2^-7,2^-8,2^-9";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ValidationError(key + ": not a number: '" + text + "'");
    }
    if (!std::isfinite(value)) throw ValidationError(key + ": must be finite");
    return value;
}

std::int64_t parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ValidationError(key + ": not an integer: '" + text + "'");
    }
    return value;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ValidationError(key + ": not a nonnegative integer: '" + text + "'");
    }
    return value;
}

class Config {
public:
    explicit Config(Settings values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.contains(key); }

    std::string str(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    double real(const std::string& key, double fallback) const {
        return has(key) ? parse_double(key, values_.at(key)) : fallback;
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        return has(key) ? parse_int(key, values_.at(key)) : fallback;
    }
    std::int64_t positive(const std::string& key, std::int64_t fallback) const {
        const std::int64_t v = integer(key, fallback);
        if (v < 1) throw ValidationError(key + " must be >= 1");
        return v;
    }
    std::uint64_t uinteger(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? parse_uint(key, values_.at(key)) : fallback;
    }
    double step(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        try {
            return parse_step(values_.at(key));
        } catch (const ValidationError& e) {
            throw ValidationError(key + ": " + e.what());
        }
    }
    std::vector<double> steps(const std::string& key, const std::string& fallback) const {
        std::vector<double> out;
        for (const auto& part : split(str(key, fallback), ',')) {
            try {
                out.push_back(parse_step(part));
            } catch (const ValidationError& e) {
                throw ValidationError(key + ": " + e.what());
            }
        }
        if (out.empty()) throw ValidationError(key + " must list at least one step size");
        return out;
    }
    std::vector<double> reals(const std::string& key, const std::string& fallback) const {
        std::vector<double> out;
        for (const auto& part : split(str(key, fallback), ',')) out.push_back(parse_double(key, part));
        if (out.empty()) throw ValidationError(key + " must list at least one value");
        return out;
    }

private:
    Settings values_;
};

// ----------------------------------------------------------------- problem

struct ProblemSetup {
    std::string name;
    BuiltinProblem builtin;
    bool linear = false;
};

ProblemSetup problem_from(const Config& cfg) {
    ProblemSetup setup;
    setup.name = cfg.str("problem", "linear-additive");
    const auto defaults = builtin_defaults(setup.name);
    std::map<std::string, double> params;
    for (const std::string key : {"theta1", "theta2", "a", "b", "x0"}) {
        if (!cfg.has(key)) continue;
        if (!defaults.contains(key)) throw ValidationError(key + " does not apply to problem " + setup.name);
        params[key] = cfg.real(key, 0.0);
    }
    setup.builtin = make_builtin(setup.name, params);
    setup.linear = setup.name == "linear-additive";
    return setup;
}

LinearAdditiveParams<double> linear_params(const ProblemSetup& setup) {
    const auto& p = setup.builtin.parameters;
    return {p.at("theta1"), p.at("theta2"), p.at("x0")};
}

std::vector<TestFunction> phis_from(const Config& cfg, const std::string& fallback) {
    if (cfg.has("phi") && cfg.has("phis")) throw ValidationError("give either phi or phis, not both");
    const std::string key = cfg.has("phi") ? "phi" : "phis";
    std::vector<TestFunction> out;
    for (const auto& name : split(cfg.str(key, fallback), ',')) out.push_back(parse_test_function(name));
    if (out.empty()) throw ValidationError(key + " must list at least one test function");
    return out;
}

McOptions mc_options(const Config& cfg) {
    McOptions o;
    o.master_seed = cfg.uinteger("master-seed", 0);
    const auto hw = static_cast<std::int64_t>(std::max(1u, std::thread::hardware_concurrency()));
    o.threads = static_cast<int>(cfg.positive("threads", hw));
    return o;
}

BeConfig step_config(const Config& cfg, double fallback) { return config_for_step(cfg.step("delta", fallback)); }

VectorD scalar_state(double v) { return VectorD::Constant(1, v); }

// ------------------------------------------------------------------ output

struct Output {
    std::string path;
    bool json = false;
    std::ostream& out;

    void write(const std::string& target, const std::string& content) const {
        if (target.empty() || target == "-") {
            out << content;
            out.flush();
        } else {
            write_output(target, content);
        }
    }
    bool to_stdout() const { return path.empty() || path == "-"; }
};

Output output_from(const Config& cfg, std::ostream& out) {
    const std::string format = cfg.str("format", "csv");
    if (format != "csv" && format != "json") throw ValidationError("format must be csv or json, got '" + format + "'");
    return {cfg.str("output", "-"), format == "json", out};
}

// "out/weak.csv" -> "out/weak.cos_abs.csv"
std::string tagged_path(const std::string& path, const std::string& tag) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + tag;
    return path.substr(0, dot) + "." + tag + path.substr(dot);
}

json header(const std::string& command, const ProblemSetup& setup, const McOptions* mc) {
    json j{{"command", command}, {"problem", setup.name}, {"parameters", setup.builtin.parameters}};
    if (mc) j["master_seed"] = mc->master_seed;
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Writes one CSV per report (tagged by φ when there are several) or a
// single JSON document holding all of them.
template <typename Report, typename Writer>
void emit_reports(const Output& o, json doc, const std::vector<Report>& reports, const Writer& write_csv,
                  const std::function<std::string(const Report&)>& comment) {
    if (o.json) {
        doc["reports"] = reports;
        o.write(o.path, dump(doc));
        return;
    }
    if (o.to_stdout()) {
        std::ostringstream s;
        for (const auto& r : reports) {
            if (reports.size() > 1 || comment) s << "# phi=" << to_string(r.phi) << (comment ? comment(r) : "") << '\n';
            write_csv(s, r);
        }
        o.write("-", s.str());
        return;
    }
    for (const auto& r : reports) {
        std::ostringstream s;
        write_csv(s, r);
        o.write(reports.size() > 1 ? tagged_path(o.path, to_string(r.phi)) : o.path, s.str());
    }
}

// ---------------------------------------------------------------- commands

void cmd_moments(const Config& cfg, const Output& o) {
    const ProblemSetup setup = problem_from(cfg);
    if (!setup.linear) throw ValidationError("moments needs the linear-additive problem (closed-form law)");
    const auto params = linear_params(setup);
    const double t_max = cfg.real("t-max", 10.0);
    const double h = cfg.step("grid-step", 0x1.0p-6);
    if (!(t_max > 0.0)) throw ValidationError("t-max must be positive");
    const std::int64_t n = exact_step_count(t_max, h);
    const std::int64_t per_unit = exact_step_count(1.0, h);

    std::vector<double> ts, means, vars;
    std::vector<int> integer_time;
    for (std::int64_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * h;
        ts.push_back(t);
        means.push_back(exact_mean(params, t));
        vars.push_back(exact_variance(params, t));
        integer_time.push_back(i % per_unit == 0 ? 1 : 0);
    }
    if (o.json) {
        const LinearLaw<double> l = law(params);
        json doc = header("moments", setup, nullptr);
        doc["mu_one"] = l.mu_one;
        doc["sigma_one"] = l.sigma_one;
        doc["stationary_mean"] = l.stationary_mean ? json(*l.stationary_mean) : json(nullptr);
        doc["stationary_variance"] = l.stationary_variance ? json(*l.stationary_variance) : json(nullptr);
        doc["t"] = ts;
        doc["mean"] = means;
        doc["variance"] = vars;
        doc["integer_time"] = integer_time;
        o.write(o.path, dump(doc));
        return;
    }
    std::ostringstream s;
    s << "t,mean,variance,integer_time\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        s << format_double(ts[i]) << ',' << format_double(means[i]) << ',' << format_double(vars[i]) << ','
          << integer_time[i] << '\n';
    }
    o.write(o.path, s.str());
}

void cmd_weak_order(const Config& cfg, const Output& o) {
    const ProblemSetup setup = problem_from(cfg);
    const McOptions mc = mc_options(cfg);
    WeakErrorSettings ws;
    ws.T = cfg.positive("T", setup.linear ? 5 : 6);
    ws.fine_step = cfg.step("fine-step", 0x1.0p-11);
    ws.deltas = cfg.steps("deltas", kDefaultDeltas);
    ws.n_paths = static_cast<std::size_t>(cfg.positive("n-paths", setup.linear ? 1000 : 2000));
    for (double d : ws.deltas) {
        if (!(d > ws.fine_step)) throw ValidationError("every step in deltas must be coarser than fine-step");
    }
    const auto phis = phis_from(cfg, setup.linear ? "sin_sq,cos_abs,atan_abs,exp_neg_sq"
                                                  : "sin_sq_shift,cos_abs,atan_sq,exp_neg_sq");
    const ReferenceSampler reference = setup.linear ? exact_linear_reference(linear_params(setup))
                                                    : ssbe_reference(setup.builtin.problem);
    const auto reports = estimate_weak_errors(setup.builtin.problem, reference, ws, phis, mc);

    json doc = header("weak-order", setup, &mc);
    doc["T"] = ws.T;
    doc["fine_step"] = ws.fine_step;
    doc["reference"] = setup.linear ? "exact" : "split-step-backward-euler";
    const auto slope_text = [](const WeakErrorReport& r) {
        return r.slope_defined ? format_double(r.fitted_slope) : std::string("undefined");
    };
    emit_reports<WeakErrorReport>(o, doc, reports,
                                  [](std::ostream& s, const WeakErrorReport& r) { write_weak_error_csv(s, r); },
                                  [&](const WeakErrorReport& r) { return " fitted_slope=" + slope_text(r); });
    if (!o.to_stdout()) {
        std::ostringstream s;
        for (const auto& r : reports) s << "phi=" << to_string(r.phi) << " fitted_slope=" << slope_text(r) << '\n';
        o.out << s.str();
    }
}

void cmd_ergodicity(const Config& cfg, const Output& o) {
    const ProblemSetup setup = problem_from(cfg);
    const McOptions mc = mc_options(cfg);
    const BeConfig be = step_config(cfg, 0x1.0p-4);
    const std::int64_t K = cfg.integer("K", 30);
    const auto n_paths = static_cast<std::size_t>(cfg.positive("n-paths", 2000));
    std::vector<VectorD> initials;
    for (double v : cfg.reals("initials", "-2,-1,0,1,2")) initials.push_back(scalar_state(v));
    const auto phis = phis_from(cfg, setup.linear ? "atan_abs,cos_abs,sin_sq" : "atan_abs,sin_sq,exp_neg_sq");
    const auto reports = ergodic_mean_traces(setup.builtin.problem, be, initials, K, n_paths, phis, mc);

    json doc = header("ergodicity", setup, &mc);
    doc["delta"] = be.delta();
    doc["K"] = K;
    emit_reports<ErgodicityReport>(o, doc, reports,
                                   [](std::ostream& s, const ErgodicityReport& r) { write_ergodicity_csv(s, r); },
                                   nullptr);
}

void cmd_contraction(const Config& cfg, const Output& o) {
    const ProblemSetup setup = problem_from(cfg);
    const McOptions mc = mc_options(cfg);
    const BeConfig be = step_config(cfg, 0x1.0p-4);
    const std::int64_t K = cfg.integer("K", 20);
    const auto n_paths = static_cast<std::size_t>(cfg.positive("n-paths", 1000));
    const VectorD x = scalar_state(cfg.real("x", 2.0));
    const VectorD y = scalar_state(cfg.real("y", -2.0));
    const auto report = contraction_estimate(setup.builtin.problem, be, x, y, n_paths, K, mc, setup.builtin.dissipativity);

    if (o.json) {
        json doc = header("contraction", setup, &mc);
        doc["delta"] = be.delta();
        doc["K"] = K;
        doc["report"] = report;
        o.write(o.path, dump(doc));
        return;
    }
    std::ostringstream s;
    write_contraction_csv(s, report);
    o.write(o.path, s.str());
    if (!o.to_stdout() && report.within_bound) {
        o.out << "rbar1_block=" << format_double(*report.rbar1_block)
              << " within_bound=" << (*report.within_bound ? "true" : "false") << '\n';
    }
}

void cmd_check(const Config& cfg, const Output& o) {
    const ProblemSetup setup = problem_from(cfg);
    DissipativityParams<double> params = setup.builtin.dissipativity;
    params.lambda1 = cfg.real("lambda1", params.lambda1);
    params.lambda2 = cfg.real("lambda2", params.lambda2);
    params.lambda3 = cfg.real("lambda3", params.lambda3);
    validate(params);
    const auto p = cfg.integer("p", 1);
    if (p < 1 || p > 1000) throw ValidationError("p must lie in [1, 1000]");
    const double delta = cfg.step("delta", 0x1.0p-4);
    const auto m = exact_step_count(1.0, delta);
    const auto n_probes = static_cast<std::size_t>(cfg.positive("n-probes", 10000));
    const double radius = cfg.real("radius", 10.0);
    const std::uint64_t seed = cfg.uinteger("master-seed", 0);

    const bool ergodic = check_ergodicity_condition(params);
    const bool moments = check_moment_condition(params, static_cast<int>(p));
    const ProbeReport probe = probe_dissipativity(setup.builtin.problem, params, n_probes, radius, seed);
    std::optional<ContractionRates<double>> rates;
    if (ergodic) rates = contraction_rates(params, delta, static_cast<int>(m));

    if (o.json) {
        json doc = header("check", setup, nullptr);
        doc["dissipativity"] = params;
        doc["ergodicity_margin"] = params.ergodicity_margin();
        doc["ergodicity_condition"] = ergodic;
        doc["p"] = p;
        doc["moment_condition"] = moments;
        doc["rates"] = rates ? json(*rates) : json(nullptr);
        doc["probe"] = probe;
        o.write(o.path, dump(doc));
        return;
    }
    std::ostringstream s;
    s << "quantity,value\n";
    auto row = [&s](const std::string& k, const std::string& v) { s << k << ',' << v << '\n'; };
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    row("lambda1", format_double(params.lambda1));
    row("lambda2", format_double(params.lambda2));
    row("lambda3", format_double(params.lambda3));
    row("f00_norm_sq", format_double(params.f00_norm_sq));
    row("g00_norm_sq", format_double(params.g00_norm_sq));
    row("ergodicity_margin", format_double(params.ergodicity_margin()));
    row("ergodicity_condition", flag(ergodic));
    row("p", std::to_string(p));
    row("moment_condition", flag(moments));
    if (rates) {
        row("delta", format_double(rates->delta));
        row("alpha", format_double(rates->alpha));
        row("beta", format_double(rates->beta));
        row("gamma", format_double(rates->gamma));
        row("r_one", format_double(rates->r_one));
        row("rbar_one", format_double(rates->rbar_one));
        row("alpha1", format_double(rates->alpha1));
        row("beta1", format_double(rates->beta1));
        row("gamma1", format_double(rates->gamma1));
        row("alpha2", format_double(rates->alpha2));
        row("beta2", format_double(rates->beta2));
        row("rbar1_block", format_double(rates->rbar1_block));
    }
    row("probe_n", std::to_string(probe.n_probes));
    row("probe_radius", format_double(probe.radius));
    row("probe_monotone_violations", std::to_string(probe.monotone.violations));
    row("probe_muy_violations", std::to_string(probe.muy.violations));
    row("probe_sigma_violations", std::to_string(probe.sigma.violations));
    row("probe_monotone_worst_margin", format_double(probe.monotone.worst_margin));
    row("probe_muy_worst_margin", format_double(probe.muy.worst_margin));
    row("probe_sigma_worst_margin", format_double(probe.sigma.worst_margin));
    o.write(o.path, s.str());
}

Scheme parse_scheme(const std::string& name) {
    if (name == "be" || name == "backward-euler") return Scheme::backward_euler;
    if (name == "em" || name == "euler-maruyama") return Scheme::euler_maruyama;
    if (name == "ssbe" || name == "split-step-backward-euler") return Scheme::split_step_backward_euler;
    throw ValidationError("unknown scheme '" + name + "' (expected be, em or ssbe)");
}

void cmd_simulate(const Config& cfg, const Output& o) {
    const ProblemSetup setup = problem_from(cfg);
    const Scheme scheme = parse_scheme(cfg.str("scheme", "be"));
    const BeConfig be = step_config(cfg, 0x1.0p-6);
    const double fine = cfg.step("fine-step", 0x1.0p-11);
    if (fine > be.delta()) throw ValidationError("fine-step must not be coarser than delta");
    const std::int64_t T = cfg.positive("T", setup.linear ? 5 : 6);
    const std::uint64_t seed = cfg.uinteger("master-seed", 0);
    const std::uint64_t path_index = cfg.uinteger("path-index", 0);

    const BrownianGrid grid = generate_path(seed, path_index, static_cast<double>(T), fine, setup.builtin.problem.dim_noise);
    const IncrementPath coarse = coarsen(grid, exact_step_count(be.delta(), fine));
    if (cfg.has("path-dump")) write_path_binary(cfg.str("path-dump", ""), coarse);
    const auto traj = simulate(scheme, setup.builtin.problem, be, coarse, T, path_index);
    if (o.json) {
        json doc = header("simulate", setup, nullptr);
        doc["master_seed"] = seed;
        doc["trajectory"] = traj;
        o.write(o.path, dump(doc));
        return;
    }
    std::ostringstream s;
    write_trajectory_csv(s, traj);
    o.write(o.path, s.str());
}

using Command = void (*)(const Config&, const Output&);

struct CommandSpec {
    const char* name;
    const char* help;
    Command fn;
};

const std::vector<CommandSpec>& commands() {
    static const std::vector<CommandSpec> all = {
        {"moments", "closed-form mean and variance of the linear problem over time", cmd_moments},
        {"weak-order", "weak error table and fitted order over a set of step sizes", cmd_weak_order},
        {"ergodicity", "backward Euler mean traces from several initial values", cmd_ergodicity},
        {"contraction", "mean-square distance of coupled chains against the contraction factor", cmd_contraction},
        {"check", "ergodicity and moment conditions, rates and a dissipativity probe", cmd_check},
        {"simulate", "one trajectory on a generated Brownian path", cmd_simulate},
    };
    return all;
}

std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

}  // namespace

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "problem", "theta1",  "theta2",    "a",     "b",      "x0",    "master-seed", "output",
        "format",  "threads", "t-max",     "grid-step", "T",  "fine-step", "deltas", "n-paths",
        "phis",    "phi",     "initials",  "K",     "delta",  "x",     "y",           "lambda1",
        "lambda2", "lambda3", "p",         "n-probes", "radius", "scheme", "path-index", "path-dump",
    };
    return keys;
}

Settings parse_config(const std::string& text) {
    Settings out;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    const auto& keys = known_keys();
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = normalize_key(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ValidationError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
        }
        if (value.empty()) throw ValidationError("config line " + std::to_string(number) + ": empty value for " + key);
        out[key] = value;
    }
    return out;
}

Settings read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config(s.str());
}

double parse_step(const std::string& text) {
    const std::string t = trim(text);
    double value = 0.0;
    if (t.rfind("2^", 0) == 0) {
        const std::int64_t e = parse_int("exponent", t.substr(2));
        if (e > 0 || e < -60) throw ValidationError("step 2^" + std::to_string(e) + " outside 2^-60..2^0");
        value = std::ldexp(1.0, static_cast<int>(e));
    } else if (const auto slash = t.find('/'); slash != std::string::npos) {
        const double num = parse_double("step", t.substr(0, slash));
        const double den = parse_double("step", t.substr(slash + 1));
        if (den == 0.0) throw ValidationError("step has zero denominator");
        value = num / den;
    } else {
        value = parse_double("step", t);
    }
    if (!is_dyadic_step(value)) throw ValidationError("step '" + text + "' is not of the form 2^-k");
    return value;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Backward Euler experiments for SDEs with piecewise constant arguments", "sdepca"};
    app.require_subcommand(1);
    Settings flag_values;
    std::string config_path;
    std::vector<std::pair<CLI::App*, std::vector<std::pair<std::string, CLI::Option*>>>> subs;
    for (const auto& spec : commands()) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        sub->add_option("--config", config_path, "flat key = value file; flags override it");
        std::vector<std::pair<std::string, CLI::Option*>> opts;
        for (const auto& key : known_keys()) opts.emplace_back(key, sub->add_option("--" + key, flag_values[key]));
        subs.emplace_back(sub, std::move(opts));
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error_code=validation detail=" << e.what() << '\n';
        return 2;
    }

    try {
        for (std::size_t i = 0; i < subs.size(); ++i) {
            CLI::App* sub = subs[i].first;
            if (!sub->parsed()) continue;
            Settings settings = config_path.empty() ? Settings{} : read_config_file(config_path);
            for (const auto& [key, opt] : subs[i].second) {
                if (opt->count() > 0) settings[key] = flag_values[key];
            }
            const Config cfg(std::move(settings));
            const Output o = output_from(cfg, out);
            commands()[i].fn(cfg, o);
            return 0;
        }
        return 2;
    } catch (const ValidationError& e) {
        err << "error_code=" << e.code() << " detail=" << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "error_code=" << e.code() << " detail=" << e.describe() << '\n';
        return 3;
    } catch (const Error& e) {
        err << "error_code=" << e.code() << " detail=" << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error_code=internal detail=" << e.what() << '\n';
        return 1;
    }
}

}  // namespace sdepca::cli
