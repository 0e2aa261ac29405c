#pragma once

#include <cstdint>
#include <random>

namespace mra {

// Counter-based seed derivation: child streams are produced by hashing the
// parent seed with stream labels, so parallel and serial traversals of the
// same labels see identical randomness.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0,
                            uint64_t c = 0) {
    uint64_t h = splitmix64(seed ^ 0x243f6a8885a308d3ull);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

inline std::mt19937_64 make_rng(uint64_t seed, uint64_t a, uint64_t b = 0,
                                uint64_t c = 0) {
    return std::mt19937_64(derive_seed(seed, a, b, c));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; spelled out here so draws depend only on
// the engine's standardized output stream.
class NormalDraw {
  public:
    double operator()(std::mt19937_64& rng) {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = uniform01(rng);
        while (u1 <= 0.0) u1 = uniform01(rng);
        const double u2 = uniform01(rng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586 * u2;
        spare_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

  private:
    bool have_ = false;
    double spare_ = 0.0;
};

}  // namespace mra
