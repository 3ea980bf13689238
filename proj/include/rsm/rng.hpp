#pragma once

// Seeded random source shared by index construction, the generators, and the
// link experiment. All randomized behavior in the project flows through one
// Rng instance per run so a fixed seed reproduces output byte for byte; keep
// draw sites serial and in a documented order.

#include <cstdint>
#include <random>

namespace rsm {

class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next() { return eng_(); }

    // Uniform in [0, 1): top 53 bits of the draw, so values are exactly
    // representable and the stream is identical across platforms.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n). Modulo bias is negligible at the scales used here
    // (n is at most a few thousand against a 64-bit range).
    uint64_t below(uint64_t n) { return n <= 1 ? 0 : next() % n; }

    // Uniform integer in [lo, hi] inclusive.
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace rsm
