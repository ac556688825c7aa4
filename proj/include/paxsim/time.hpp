#pragma once

#include <cstdint>

namespace paxsim {

// Virtual time in integer nanoseconds. All dynamics are computed in integer
// arithmetic so runs are bit-for-bit reproducible across builds.
using SimTime = std::int64_t;

constexpr SimTime kMicrosecond = 1'000;
constexpr SimTime kMillisecond = 1'000'000;
constexpr SimTime kSecond = 1'000'000'000;

constexpr SimTime from_us(std::int64_t us) { return us * kMicrosecond; }
constexpr SimTime from_ms(std::int64_t ms) { return ms * kMillisecond; }
constexpr SimTime from_s(std::int64_t s) { return s * kSecond; }

inline double to_seconds(SimTime t) { return static_cast<double>(t) / 1e9; }

// Time to move `bytes` through a resource of `rate` bytes/second, rounded up.
inline SimTime transfer_ns(std::uint64_t bytes, std::uint64_t rate_bytes_per_s) {
    if (rate_bytes_per_s == 0) return 0;
    const auto num = bytes * 1'000'000'000ull;
    return static_cast<SimTime>((num + rate_bytes_per_s - 1) / rate_bytes_per_s);
}

}  // namespace paxsim
