#pragma once

#include <cstdint>
#include <string_view>

namespace paxsim {

// Deterministic named random streams. Every consumer of randomness owns a
// stream derived from (scenario seed, stream label); draws on one stream never
// perturb another, so adding a consumer does not reshuffle existing runs.
class RngStream {
public:
    RngStream() : state_(0x9e3779b97f4a7c15ull) {}

    RngStream(std::uint64_t seed, std::string_view label) {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        state_ = splitmix(h ^ (seed * 0x9e3779b97f4a7c15ull));
        if (state_ == 0) state_ = 0x2545f4914f6cdd1dull;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return splitmix(state_);
    }

    // Uniform integer in [0, bound). bound = 0 yields 0.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) return 0;
        return next_u64() % bound;
    }

    // Uniform double in [0, 1), 53 bits of entropy.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t splitmix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

}  // namespace paxsim
