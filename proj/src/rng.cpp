#include "phasecoh/rng.hpp"

#include <cmath>

namespace phasecoh {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void mul_hilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key)
{
    std::array<std::uint32_t, 4> c = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mul_hilo(kPhiloxM4x32A, c[0], lo0, hi0);
        mul_hilo(kPhiloxM4x32B, c[2], lo1, hi1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kPhiloxW32A;
        k[1] += kPhiloxW32B;
    }
    return c;
}

SubStream::SubStream(std::uint64_t seed, std::uint64_t stream_id, RngChannel channel)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_lo_(static_cast<std::uint32_t>(stream_id)),
      stream_hi_tag_(static_cast<std::uint32_t>((stream_id >> 32) & 0xFFFFFFu) |
                     (static_cast<std::uint32_t>(channel) << 24))
{
}

void SubStream::refill()
{
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>(block_ >> 32),
        stream_lo_,
        stream_hi_tag_,
    };
    buf_ = philox4x32(ctr, key_);
    ++block_;
    words_left_ = 4;
}

std::uint32_t SubStream::next_u32()
{
    if (words_left_ == 0) refill();
    return buf_[4 - words_left_--];
}

std::uint64_t SubStream::next_u64()
{
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double SubStream::next_uniform()
{
    // 53-bit mantissa, offset by half an ulp to stay inside (0, 1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

void SubStream::next_gaussian_pair(double& g0, double& g1)
{
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    g0 = r * std::cos(2.0 * M_PI * u2);
    g1 = r * std::sin(2.0 * M_PI * u2);
}

double SubStream::next_gaussian()
{
    if (has_cached_gauss_) {
        has_cached_gauss_ = false;
        return cached_gauss_;
    }
    double g0, g1;
    next_gaussian_pair(g0, g1);
    cached_gauss_ = g1;
    has_cached_gauss_ = true;
    return g0;
}

}  // namespace phasecoh
