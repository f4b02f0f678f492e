#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace sdepca {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A pure
/// function of (counter, key): no state, so any draw can be produced in any
/// order on any thread.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// Independent random families that share a master seed.
enum class StreamDomain : std::uint32_t {
    brownian = 0,
    exact_integer = 1,
    probe = 2,
};

/// Standard normal / uniform variates addressed by (seed, stream, index).
///
/// Draw `i` comes from Philox block `i / 2`; each block yields two 64-bit
/// words, each mapped to a uniform in (0, 1) with 53 random bits and then
/// to a normal through the inverse CDF (-sqrt(2) * erfc_inv(2u)).
class GaussianStream {
public:
    GaussianStream(std::uint64_t master_seed, std::uint64_t stream,
                   StreamDomain domain = StreamDomain::brownian) noexcept;

    double uniform(std::uint64_t index) const noexcept;
    double normal(std::uint64_t index) const;
    double operator()(std::uint64_t index) const { return normal(index); }

    /// out[j] = normal(first + j).
    void fill_normal(std::uint64_t first, std::span<double> out) const;

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
};

/// Inverse standard normal CDF on (0, 1).
double normal_quantile(double u);

}  // namespace sdepca
