#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "sdepca/types.hpp"

namespace sdepca {

/// A run of Brownian increments at a uniform step: column i holds the
/// r-vector B(t_{i+1}) - B(t_i).
struct IncrementPath {
    double step = 0.0;
    Eigen::MatrixXd values;  // r × n

    Eigen::Index size() const noexcept { return values.cols(); }
    int dim_noise() const noexcept { return static_cast<int>(values.rows()); }
    double horizon() const noexcept { return step * static_cast<double>(size()); }
};

/// One fine-resolution Brownian path, regenerated bit-for-bit from
/// (master_seed, path_index). Immutable after construction.
class BrownianGrid {
public:
    BrownianGrid(double fine_step, double horizon, std::uint64_t master_seed,
                 std::uint64_t path_index, Eigen::MatrixXd increments);

    double fine_step() const noexcept { return path_.step; }
    double horizon() const noexcept { return horizon_; }
    int dim_noise() const noexcept { return path_.dim_noise(); }
    Eigen::Index size() const noexcept { return path_.size(); }
    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t path_index() const noexcept { return path_index_; }

    const Eigen::MatrixXd& increments() const noexcept { return path_.values; }
    const IncrementPath& path() const noexcept { return path_; }

private:
    IncrementPath path_;
    double horizon_;
    std::uint64_t master_seed_;
    std::uint64_t path_index_;
};

/// True iff `step` is 2^-k for some integer k >= 0.
bool is_dyadic_step(double step) noexcept;

/// Number of steps of size `step` in `horizon`, or a ValidationError when the
/// ratio is not an exact positive integer.
std::int64_t exact_step_count(double horizon, double step);

/// Increment i, component c, is sqrt(fine_step) * normal(i * r + c) of the
/// Brownian stream keyed by (master_seed, path_index).
BrownianGrid generate_path(std::uint64_t master_seed, std::uint64_t path_index, double horizon,
                           double fine_step, int dim_noise);

/// Sums consecutive groups of `factor` increments.
///
/// The summation order is fixed: the power-of-two part of `factor` is
/// applied as repeated pairwise halvings, then any remaining odd factor is
/// summed left to right. For dyadic factors this makes
/// coarsen(coarsen(p, a), b) bit-identical to coarsen(p, a * b).
IncrementPath coarsen(const IncrementPath& path, std::int64_t factor);
IncrementPath coarsen(const BrownianGrid& grid, std::int64_t factor);

/// The increment ΔB_{km+l} of a coarse path.
VectorD block_increment(const IncrementPath& coarse, std::int64_t m, std::int64_t k, std::int64_t l);

/// Binary dump: "SPCA", version u32, step f64, length u64, r u32, then
/// length·r little-endian f64 increments (increment-major).
void write_path_binary(std::ostream& out, const IncrementPath& path);
void write_path_binary(const std::string& filename, const IncrementPath& path);
IncrementPath read_path_binary(std::istream& in);

}  // namespace sdepca
