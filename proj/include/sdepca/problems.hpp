#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdepca/model.hpp"

namespace sdepca {

/// dX = (-θ₁X(t) + θ₂X([t])) dt + dB(t).
template <typename Scalar>
Problem<Scalar> linear_additive(Scalar theta1, Scalar theta2, Scalar x0) {
    using P = Problem<Scalar>;
    P problem;
    problem.tag = "linear-additive";
    problem.dim_state = 1;
    problem.dim_noise = 1;
    problem.drift = [theta1, theta2](const typename P::VectorType& x, const typename P::VectorType& y) {
        return typename P::VectorType(-theta1 * x + theta2 * y);
    };
    problem.diffusion = [](const typename P::VectorType&, const typename P::VectorType&) {
        return typename P::MatrixType(P::MatrixType::Ones(1, 1));
    };
    problem.drift_jacobian_x = [theta1](const typename P::VectorType&, const typename P::VectorType&) {
        return typename P::MatrixType(P::MatrixType::Constant(1, 1, -theta1));
    };
    problem.initial_state = P::VectorType::Constant(1, x0);
    return problem;
}

/// dX = (-X³ - 10X + 2X([t]) + 1) dt + (aX(t) + bX([t])) dB(t).
template <typename Scalar>
Problem<Scalar> cubic_multiplicative(Scalar a, Scalar b, Scalar x0) {
    using P = Problem<Scalar>;
    P problem;
    problem.tag = "cubic-multiplicative";
    problem.dim_state = 1;
    problem.dim_noise = 1;
    problem.drift = [](const typename P::VectorType& x, const typename P::VectorType& y) {
        const Scalar v = x[0];
        return typename P::VectorType(P::VectorType::Constant(1, -v * v * v - Scalar(10) * v + Scalar(2) * y[0] + Scalar(1)));
    };
    problem.diffusion = [a, b](const typename P::VectorType& x, const typename P::VectorType& y) {
        return typename P::MatrixType(P::MatrixType::Constant(1, 1, a * x[0] + b * y[0]));
    };
    problem.drift_jacobian_x = [](const typename P::VectorType& x, const typename P::VectorType&) {
        return typename P::MatrixType(P::MatrixType::Constant(1, 1, -Scalar(3) * x[0] * x[0] - Scalar(10)));
    };
    problem.initial_state = P::VectorType::Constant(1, x0);
    return problem;
}

/// A built-in problem instantiated from named parameters, together with
/// dissipativity constants that hold for it.
struct BuiltinProblem {
    Problem<double> problem;
    DissipativityParams<double> dissipativity;
    std::map<std::string, double> parameters;
};

/// Registered names: "linear-additive" (theta1, theta2, x0) and
/// "cubic-multiplicative" (a, b, x0). Missing parameters take their
/// defaults; unknown names or parameters throw ValidationError.
BuiltinProblem make_builtin(const std::string& name, const std::map<std::string, double>& parameters = {});

std::vector<std::string> builtin_names();

/// Defaults for one built-in, e.g. {theta1: 3, theta2: 1, x0: 1}.
std::map<std::string, double> builtin_defaults(const std::string& name);

}  // namespace sdepca
