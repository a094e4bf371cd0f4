#pragma once

#include <array>
#include <cstdint>

namespace phasecoh {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// A stream is addressed by (seed, stream_id, channel); blocks along the
// stream are indexed by a 64-bit counter.  Output for a given address is a
// pure function of that address, so shots can be generated in any order, on
// any number of workers, with identical results.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        const std::array<std::uint32_t, 2>& key);

// Channels keep the random inputs of one shot statistically independent.
enum class RngChannel : std::uint32_t {
    emission = 0,    // Bernoulli emission draw
    noise = 1,       // additive complex Gaussian noise
    dephasing = 2,   // white dephasing walk
    correlated = 3,  // correlated (OU / white-model) phase path
};

class SubStream {
public:
    SubStream(std::uint64_t seed, std::uint64_t stream_id, RngChannel channel);

    std::uint64_t next_u64();

    // uniform on (0, 1); never returns 0 so log() is safe
    double next_uniform();

    // standard normal pair via Box-Muller; pairs consume one Philox block
    void next_gaussian_pair(double& g0, double& g1);
    double next_gaussian();

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_tag_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int words_left_ = 0;
    double cached_gauss_ = 0.0;
    bool has_cached_gauss_ = false;

    void refill();
    std::uint32_t next_u32();
};

}  // namespace phasecoh
