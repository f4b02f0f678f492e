#include "sdepca/brownian.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <istream>

#include "sdepca/errors.hpp"
#include "sdepca/rng.hpp"

namespace sdepca {
namespace {

constexpr char kMagic[4] = {'S', 'P', 'C', 'A'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little, "little-endian host required");
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    char bytes[sizeof(T)];
    if (!in.read(bytes, sizeof(T))) {
        throw ValidationError("truncated path file");
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

// One pairwise halving: out[j] = in[2j] + in[2j+1].
Eigen::MatrixXd halve(const Eigen::MatrixXd& in) {
    const Eigen::Index n = in.cols() / 2;
    Eigen::MatrixXd out(in.rows(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.col(j) = in.col(2 * j) + in.col(2 * j + 1);
    }
    return out;
}

}  // namespace

BrownianGrid::BrownianGrid(double fine_step, double horizon, std::uint64_t master_seed,
                           std::uint64_t path_index, Eigen::MatrixXd increments)
    : path_{fine_step, std::move(increments)},
      horizon_(horizon),
      master_seed_(master_seed),
      path_index_(path_index) {}

bool is_dyadic_step(double step) noexcept {
    if (!(step > 0.0) || step > 1.0 || !std::isfinite(step)) return false;
    int exponent = 0;
    return std::frexp(step, &exponent) == 0.5;
}

std::int64_t exact_step_count(double horizon, double step) {
    if (!(horizon > 0.0) || !(step > 0.0) || !std::isfinite(horizon)) {
        throw ValidationError("horizon and step must be positive");
    }
    const double ratio = horizon / step;
    if (ratio != std::floor(ratio) || ratio > 9.0e15 || ratio * step != horizon) {
        throw ValidationError("horizon " + std::to_string(horizon) + " is not an integer multiple of step " +
                              std::to_string(step));
    }
    return static_cast<std::int64_t>(ratio);
}

BrownianGrid generate_path(std::uint64_t master_seed, std::uint64_t path_index, double horizon,
                           double fine_step, int dim_noise) {
    if (!is_dyadic_step(fine_step)) {
        throw ValidationError("fine step must be 2^-k, got " + std::to_string(fine_step));
    }
    if (dim_noise < 1 || dim_noise > kMaxDim) {
        throw ValidationError("noise dimension out of range: " + std::to_string(dim_noise));
    }
    const std::int64_t n = exact_step_count(horizon, fine_step);
    Eigen::MatrixXd increments(dim_noise, n);
    const GaussianStream stream(master_seed, path_index, StreamDomain::brownian);
    stream.fill_normal(0, std::span<double>(increments.data(), static_cast<std::size_t>(increments.size())));
    increments *= std::sqrt(fine_step);
    return BrownianGrid(fine_step, horizon, master_seed, path_index, std::move(increments));
}

IncrementPath coarsen(const IncrementPath& path, std::int64_t factor) {
    if (factor < 1 || path.size() % factor != 0) {
        throw ValidationError("coarsening factor " + std::to_string(factor) + " does not divide length " +
                              std::to_string(path.size()));
    }
    Eigen::MatrixXd values = path.values;
    std::int64_t odd = factor;
    while (odd % 2 == 0) {
        values = halve(values);
        odd /= 2;
    }
    if (odd > 1) {
        const Eigen::Index n = values.cols() / odd;
        Eigen::MatrixXd grouped(values.rows(), n);
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::VectorXd sum = values.col(j * odd);
            for (std::int64_t i = 1; i < odd; ++i) sum += values.col(j * odd + i);
            grouped.col(j) = sum;
        }
        values = std::move(grouped);
    }
    return IncrementPath{path.step * static_cast<double>(factor), std::move(values)};
}

IncrementPath coarsen(const BrownianGrid& grid, std::int64_t factor) {
    return coarsen(grid.path(), factor);
}

VectorD block_increment(const IncrementPath& coarse, std::int64_t m, std::int64_t k, std::int64_t l) {
    const std::int64_t index = k * m + l;
    if (m < 1 || k < 0 || l < 0 || l >= m || index >= coarse.size()) {
        throw OutOfRangeError("increment index k*m+l=" + std::to_string(index) + " outside [0, " +
                              std::to_string(coarse.size()) + ")");
    }
    return coarse.values.col(index);
}

void write_path_binary(std::ostream& out, const IncrementPath& path) {
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kFormatVersion);
    put_le<double>(out, path.step);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(path.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.dim_noise()));
    // Column-major r × n storage is already increment-major.
    for (Eigen::Index i = 0; i < path.values.size(); ++i) put_le<double>(out, path.values.data()[i]);
    if (!out) throw Error("io", "failed writing path dump");
}

void write_path_binary(const std::string& filename, const IncrementPath& path) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw Error("io", "cannot open " + filename);
    write_path_binary(out, path);
}

IncrementPath read_path_binary(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw ValidationError("not an SPCA path file");
    }
    const auto version = get_le<std::uint32_t>(in);
    if (version != kFormatVersion) throw ValidationError("unsupported path file version " + std::to_string(version));
    IncrementPath path;
    path.step = get_le<double>(in);
    const auto length = get_le<std::uint64_t>(in);
    const auto r = get_le<std::uint32_t>(in);
    if (r < 1 || r > static_cast<std::uint32_t>(kMaxDim)) throw ValidationError("bad noise dimension in path file");
    path.values.resize(r, static_cast<Eigen::Index>(length));
    for (Eigen::Index i = 0; i < path.values.size(); ++i) path.values.data()[i] = get_le<double>(in);
    return path;
}

}  // namespace sdepca
