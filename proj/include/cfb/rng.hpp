#ifndef CFB_RNG_HPP
#define CFB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace cfb {

// Counter-free splitmix64 stream. All randomness in the project flows through
// this generator so that results are reproducible across platforms; the
// standard <random> distributions are implementation-defined and would break
// byte-identical reruns between standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Index in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via the polar method (no trig, fully deterministic).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives an independent stream from a root seed and up to two stream labels.
// Mixing through splitmix keeps sibling streams decorrelated.
inline RngStream derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    RngStream mixer(seed ^ (0xd1342543de82ef95ULL * (a + 1)) ^ (0xaf251af3b0f025b5ULL * (b + 1)));
    return RngStream(mixer.next_u64());
}

}  // namespace cfb

#endif
