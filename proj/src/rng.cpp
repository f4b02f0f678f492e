#include "sdepca/rng.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace sdepca {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t word = (static_cast<std::uint64_t>(hi) << 32) | lo;
    // 53 bits, shifted by half an ulp so 0 and 1 are unreachable.
    return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c[0], hi0, lo0);
        mulhilo(kPhiloxM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

double normal_quantile(double u) {
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

GaussianStream::GaussianStream(std::uint64_t master_seed, std::uint64_t stream,
                               StreamDomain domain) noexcept
    : stream_(stream) {
    const std::uint64_t key =
        domain == StreamDomain::brownian
            ? master_seed
            : splitmix64(master_seed ^ (0xA24BAED4963EE407ull * static_cast<std::uint64_t>(domain)));
    key_ = {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
}

double GaussianStream::uniform(std::uint64_t index) const noexcept {
    const std::uint64_t block = index >> 1;
    const Philox4x32::Counter out = Philox4x32::generate(
        {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
         static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
        key_);
    return (index & 1u) ? to_open_unit(out[2], out[3]) : to_open_unit(out[0], out[1]);
}

double GaussianStream::normal(std::uint64_t index) const {
    return normal_quantile(uniform(index));
}

void GaussianStream::fill_normal(std::uint64_t first, std::span<double> out) const {
    std::size_t j = 0;
    std::uint64_t index = first;
    while (j < out.size()) {
        const std::uint64_t block = index >> 1;
        const Philox4x32::Counter words = Philox4x32::generate(
            {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
             static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
            key_);
        if ((index & 1u) == 0) {
            out[j++] = normal_quantile(to_open_unit(words[0], words[1]));
            ++index;
            if (j == out.size()) break;
        }
        out[j++] = normal_quantile(to_open_unit(words[2], words[3]));
        ++index;
    }
}

}  // namespace sdepca
