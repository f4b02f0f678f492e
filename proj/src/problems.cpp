#include "sdepca/problems.hpp"

#include <algorithm>
#include <cmath>

namespace sdepca {
namespace {

// Constants that are exactly zero for a problem still have to be positive;
// any positive value satisfies the corresponding inequality.
constexpr double kVanishingConstant = 1e-12;

std::map<std::string, double> merged(const std::string& name, const std::map<std::string, double>& given) {
    std::map<std::string, double> values = builtin_defaults(name);
    for (const auto& [key, value] : given) {
        if (!values.contains(key)) {
            throw ValidationError("problem " + name + " has no parameter '" + key + "'");
        }
        if (!std::isfinite(value)) throw ValidationError("parameter '" + key + "' must be finite");
        values[key] = value;
    }
    return values;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"linear-additive", "cubic-multiplicative"}; }

std::map<std::string, double> builtin_defaults(const std::string& name) {
    if (name == "linear-additive") return {{"theta1", 3.0}, {"theta2", 1.0}, {"x0", 1.0}};
    if (name == "cubic-multiplicative") return {{"a", 1.0}, {"b", 1.0}, {"x0", 2.0}};
    throw ValidationError("unknown problem '" + name + "' (expected linear-additive or cubic-multiplicative)");
}

BuiltinProblem make_builtin(const std::string& name, const std::map<std::string, double>& parameters) {
    const auto values = merged(name, parameters);
    BuiltinProblem out;
    out.parameters = values;
    if (name == "linear-additive") {
        const double theta1 = values.at("theta1");
        const double theta2 = values.at("theta2");
        if (!(theta1 > 0.0)) throw ValidationError("theta1 must be positive");
        out.problem = linear_additive(theta1, theta2, values.at("x0"));
        out.dissipativity.lambda1 = theta1;
        out.dissipativity.lambda2 = std::max(theta2 * theta2, kVanishingConstant);
        out.dissipativity.lambda3 = kVanishingConstant;
    } else {
        const double a = values.at("a");
        const double b = values.at("b");
        out.problem = cubic_multiplicative(a, b, values.at("x0"));
        // -x³ only strengthens the one-sided bound; (aΔx + bΔy)² ≤ 2 max(a², b²)(Δx² + Δy²).
        out.dissipativity.lambda1 = 10.0;
        out.dissipativity.lambda2 = 4.0;
        out.dissipativity.lambda3 = std::max(2.0 * std::max(a * a, b * b), kVanishingConstant);
    }
    out.dissipativity = with_origin_norms(out.dissipativity, out.problem);
    return out;
}

}  // namespace sdepca
