#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace sdepca {

/// Base of every error the library throws. `code()` is a stable
/// machine-readable name (used verbatim by the CLI on standard error).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Bad input: preconditions, malformed configuration, out-of-range indices.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& detail)
        : Error("validation", detail) {}
    ValidationError(std::string code, const std::string& detail)
        : Error(std::move(code), detail) {}
};

class OutOfRangeError : public ValidationError {
public:
    explicit OutOfRangeError(const std::string& detail)
        : ValidationError("out_of_range", detail) {}
};

/// A computation that started but could not produce a trustworthy number.
/// Integrators attach the (path, block, step) location where it happened.
class NumericalError : public Error {
public:
    NumericalError(std::string code, const std::string& detail)
        : Error(std::move(code), detail) {}

    void set_location(std::int64_t path_index, std::int64_t block, std::int64_t step) {
        path_index_ = path_index;
        block_ = block;
        step_ = step;
    }
    std::int64_t path_index() const noexcept { return path_index_; }
    std::int64_t block() const noexcept { return block_; }
    std::int64_t step() const noexcept { return step_; }
    bool has_location() const noexcept { return block_ >= 0; }

    /// what() plus the location, when one is attached.
    std::string describe() const {
        std::string out = what();
        if (has_location()) {
            out += " (path=" + std::to_string(path_index_) + " k=" + std::to_string(block_) +
                   " l=" + std::to_string(step_) + ")";
        }
        return out;
    }

private:
    std::int64_t path_index_ = -1;
    std::int64_t block_ = -1;
    std::int64_t step_ = -1;
};

class NonConvergenceError : public NumericalError {
public:
    NonConvergenceError(const std::string& detail, double last_residual)
        : NumericalError("non_convergence", detail), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

class NonFiniteError : public NumericalError {
public:
    explicit NonFiniteError(const std::string& detail)
        : NumericalError("non_finite", detail) {}
};

/// Too many Monte Carlo paths failed for the estimate to be reported.
class PathFailureError : public NumericalError {
public:
    PathFailureError(const std::string& detail, std::size_t n_failed)
        : NumericalError("path_failure", detail), n_failed_(n_failed) {}
    std::size_t n_failed() const noexcept { return n_failed_; }

private:
    std::size_t n_failed_;
};

}  // namespace sdepca
