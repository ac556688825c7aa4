#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paxsim/errors.hpp"
#include "paxsim/time.hpp"

namespace paxsim {

using NodeId = std::uint8_t;
constexpr NodeId kNoNode = 0xff;

enum class InstanceClass : std::uint8_t { kMicro, kSmall, kLarge };

inline const char* to_string(InstanceClass c) {
    switch (c) {
        case InstanceClass::kMicro: return "MICRO";
        case InstanceClass::kSmall: return "SMALL";
        case InstanceClass::kLarge: return "LARGE";
    }
    return "?";
}

// Calibration reference: a SMALL instance processes R bytes/s of messages and
// drives its NIC at B (1 Gb/s expressed in bytes/s). Other classes are fixed
// multiples, so scenarios stay expressible as class ratios. All rates in this
// file are bytes per second.
constexpr std::uint64_t kSmallCpuBps = 25'000'000;     // R = 25 MB/s
constexpr std::uint64_t kSmallNetBps = 125'000'000;    // B = 1 Gb/s
constexpr std::uint64_t kMicroCpuBps = kSmallCpuBps / 2;
constexpr std::uint64_t kMicroNetBps = 5'000'000;      // B/25: micro NICs are slow
constexpr std::uint64_t kLargeCpuBps = kSmallCpuBps * 4;
constexpr std::uint64_t kLargeNetBps = kSmallNetBps * 2;
constexpr SimTime kSmallFixedCost = from_us(25);
constexpr SimTime kMicroFixedCost = from_us(50);
constexpr SimTime kLargeFixedCost = from_us(25) / 4;

enum class Role : std::uint8_t {
    kProposer = 1,   // leader / coordinator
    kAcceptor = 2,
    kLearner = 4,    // delivers and answers clients
    kProxy = 8,      // ring ingress for client batches
};

struct NodeSpec {
    std::string name;
    InstanceClass cls = InstanceClass::kSmall;
    std::uint8_t roles = 0;
    std::string region = "uswest2c";
    // 0 means "class default".
    std::uint64_t cpu_bps = 0;
    std::uint64_t net_bps = 0;
    SimTime fixed_msg_cost = -1;

    std::uint64_t cpu_rate() const {
        if (cpu_bps) return cpu_bps;
        switch (cls) {
            case InstanceClass::kMicro: return kMicroCpuBps;
            case InstanceClass::kLarge: return kLargeCpuBps;
            default: return kSmallCpuBps;
        }
    }
    std::uint64_t net_rate() const {
        if (net_bps) return net_bps;
        switch (cls) {
            case InstanceClass::kMicro: return kMicroNetBps;
            case InstanceClass::kLarge: return kLargeNetBps;
            default: return kSmallNetBps;
        }
    }
    SimTime fixed_cost() const {
        if (fixed_msg_cost >= 0) return fixed_msg_cost;
        switch (cls) {
            case InstanceClass::kMicro: return kMicroFixedCost;
            case InstanceClass::kLarge: return kLargeFixedCost;
            default: return kSmallFixedCost;
        }
    }
    bool has_role(Role r) const { return roles & static_cast<std::uint8_t>(r); }
};

// Measured EC2 round trips; one-way latency is RTT/2.
inline SimTime region_rtt(const std::string& a, const std::string& b) {
    auto pair_is = [&](const char* x, const char* y) {
        return (a == x && b == y) || (a == y && b == x);
    };
    if (a == b) return from_us(1500);
    if (pair_is("uswest2b", "uswest2c")) return from_us(3900);
    if (pair_is("uswest2c", "useast1b")) return from_ms(82);
    if (pair_is("uswest2b", "useast1b")) return from_ms(90);
    return from_ms(82);  // unknown cross-region pairs behave like coast-to-coast
}

constexpr std::uint64_t kCrossRegionLinkBps = 1'875'000;  // 15 Mb/s in bytes/s

struct LinkSpec {
    SimTime one_way_latency = 0;
    std::uint64_t bandwidth_bps = 0;  // shaped-uplink rate in bytes/s; 0 = unconstrained
};

// Zones within one region differ only in the trailing zone letter.
inline bool same_region(const std::string& a, const std::string& b) {
    if (a.size() != b.size() || a.empty()) return a == b;
    return a.compare(0, a.size() - 1, b, 0, b.size() - 1) == 0;
}

// In-region traffic is bounded by the NIC alone; coast-to-coast traffic
// additionally rides the sender's shaped WAN uplink.
inline LinkSpec default_link(const NodeSpec& src, const NodeSpec& dst) {
    LinkSpec l;
    l.one_way_latency = region_rtt(src.region, dst.region) / 2;
    if (!same_region(src.region, dst.region)) l.bandwidth_bps = kCrossRegionLinkBps;
    return l;
}

}  // namespace paxsim
