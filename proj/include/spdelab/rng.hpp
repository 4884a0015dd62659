#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace spdelab {

// Philox 4x32-10 counter-based generator (Salmon et al., SC'11).
//
// Every Gaussian draw is addressed by (replica, stream, step, slot), so a
// replica reproduces bit-identically under any thread count or replica
// execution order.
namespace philox {

constexpr uint32_t kW32A = 0x9E3779B9u;
constexpr uint32_t kW32B = 0xBB67AE85u;
constexpr uint32_t kM4x32A = 0xD2511F53u;
constexpr uint32_t kM4x32B = 0xCD9E8D57u;

inline void mul_hi_lo(uint32_t a, uint32_t b, uint32_t& lo, uint32_t& hi) {
    const uint64_t p = static_cast<uint64_t>(a) * b;
    lo = static_cast<uint32_t>(p);
    hi = static_cast<uint32_t>(p >> 32);
}

inline std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr,
                                     std::array<uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        uint32_t lo0, hi0, lo1, hi1;
        mul_hi_lo(kM4x32A, ctr[0], lo0, hi0);
        mul_hi_lo(kM4x32B, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW32A;
        key[1] += kW32B;
    }
    return ctr;
}

}  // namespace philox

struct NormalPair {
    double z1;
    double z2;
};

class CounterRng {
public:
    explicit CounterRng(uint64_t seed)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)} {}

    uint64_t seed() const {
        return static_cast<uint64_t>(key_[0]) | (static_cast<uint64_t>(key_[1]) << 32);
    }

    // Two uniforms in (0,1], one Philox block per call.
    std::array<double, 2> uniform_pair(uint32_t replica, uint32_t stream,
                                       uint32_t step, uint32_t slot = 0) const {
        const auto w = philox::block({replica, stream, step, slot}, key_);
        const uint64_t a = (static_cast<uint64_t>(w[0]) << 32) | w[1];
        const uint64_t b = (static_cast<uint64_t>(w[2]) << 32) | w[3];
        constexpr double scale = 1.0 / 18446744073709551616.0;  // 2^-64
        return {(static_cast<double>(a) + 1.0) * scale,
                (static_cast<double>(b) + 1.0) * scale};
    }

    // Box-Muller; u1 in (0,1] keeps the log finite.
    NormalPair normal_pair(uint32_t replica, uint32_t stream, uint32_t step,
                           uint32_t slot = 0) const {
        const auto u = uniform_pair(replica, stream, step, slot);
        const double r = std::sqrt(-2.0 * std::log(u[0]));
        const double phi = 2.0 * 3.14159265358979323846 * u[1];
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    double normal(uint32_t replica, uint32_t stream, uint32_t step,
                  uint32_t slot = 0) const {
        return normal_pair(replica, stream, step, slot).z1;
    }

private:
    std::array<uint32_t, 2> key_;
};

// Stream ids reserved by the library; noise modes occupy [0, 2^24).
namespace streams {
constexpr uint32_t kWienerBase = 0;           // + mode index
constexpr uint32_t kInitialValue = 0x01000000;  // + mode index
constexpr uint32_t kScratch = 0x02000000;       // randomized property checks
}  // namespace streams

}  // namespace spdelab
