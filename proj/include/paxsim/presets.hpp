#pragma once

#include <string>
#include <vector>

#include "paxsim/errors.hpp"
#include "paxsim/scenario.hpp"

namespace paxsim {

// Canonical starting points: config_<layout>_<size>_<variant>.
//   layout  a = uniform cluster          b = one undersized member
//           c = oversized leader         d = coast-to-coast spread
//   size    200 | 4k | 100k request payload
//   variant libpaxos | libpaxos_steering | spaxos | openreplica | ringpaxos
inline const std::vector<std::string>& preset_sizes() {
    static const std::vector<std::string> s{"200", "4k", "100k"};
    return s;
}

inline const std::vector<std::string>& preset_variants() {
    static const std::vector<std::string> v{"libpaxos", "libpaxos_steering", "spaxos",
                                            "openreplica", "ringpaxos"};
    return v;
}

inline std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (char layout : {'a', 'b', 'c', 'd'})
        for (const auto& size : preset_sizes())
            for (const auto& variant : preset_variants())
                out.push_back(std::string("config_") + layout + "_" + size + "_" + variant);
    return out;
}

// The member whose failure a kill sweep targets: a healthy quorum member for
// the leader-based variants (so the slow or remote member must step in), the
// undersized member itself for the variants that degrade gracefully.
inline std::string default_victim(const std::string& variant) {
    if (variant == "spaxos") return "replica2";
    if (variant == "openreplica") return "acceptor2";
    return "acceptor1";
}

inline Scenario preset(const std::string& name) {
    Scenario sc;
    sc.name = name;
    std::string rest = name;
    if (rest.rfind("config_", 0) != 0)
        throw ConfigError("unknown preset '" + name + "'");
    rest = rest.substr(7);
    if (rest.size() < 2 || rest[1] != '_')
        throw ConfigError("unknown preset '" + name + "'");
    sc.layout = rest[0];
    rest = rest.substr(2);
    const auto us = rest.find('_');
    if (us == std::string::npos) throw ConfigError("unknown preset '" + name + "'");
    const std::string size = rest.substr(0, us);
    sc.variant = rest.substr(us + 1);
    if (size == "200") sc.request_bytes = 200;
    else if (size == "4k") sc.request_bytes = 4096;
    else if (size == "100k") sc.request_bytes = 102400;
    else throw ConfigError("unknown preset size '" + size + "'");
    sc.horizon_s = 90;
    sc.warmup_s = 10;
    sc.cooldown_s = 10;
    sc.clients = 50;
    sc.outstanding = 8;
    sc.cap_mbps = 0;
    validate(sc);
    return sc;
}

}  // namespace paxsim
