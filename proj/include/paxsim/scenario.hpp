#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>

#include "paxsim/errors.hpp"
#include "paxsim/time.hpp"

namespace paxsim {

// A scenario is a flat sectioned key=value file:
//
//   [scenario]
//   horizon_s = 120
//   seed = 1
//   warmup_s = 10
//   cooldown_s = 10
//   clients = 50
//   outstanding = 8
//   request_bytes = 4096
//   cap_mbps = 0
//   variant = libpaxos
//   layout = b
//
//   [node.acceptor2]          # optional: override one node of the layout
//   cpu_class = micro         # small | micro | large
//   region = useast1b
//
//   [link.proposer.acceptor2] # optional: override one pair's connectivity
//   rtt_ms = 82
//   bandwidth_mbps = 15       # 0 = uncapped
//
//   [failure]
//   kill_node = acceptor2
//   kill_at_s = 60
//
// '#' starts a comment; blank lines are ignored; unknown keys are errors.

// Node names follow the variant ("proposer", "acceptor0".., "learner",
// "replica0"..); an override naming a node the variant never builds is
// rejected at run time, like kill_node.
struct NodeOverride {
    std::string cpu_class;  // empty = keep the layout's class
    std::string region;     // empty = keep the layout's placement

    bool operator==(const NodeOverride&) const = default;
};

struct LinkOverride {
    double rtt_ms = 0;           // 0 = keep the region default
    double bandwidth_mbps = -1;  // negative = keep the region default

    bool operator==(const LinkOverride&) const = default;
};

struct Scenario {
    std::string name = "scenario";
    std::uint32_t horizon_s = 120;
    std::uint32_t warmup_s = 10;
    std::uint32_t cooldown_s = 10;
    std::uint64_t seed = 1;

    std::uint16_t clients = 50;
    std::uint16_t outstanding = 8;
    std::uint32_t request_bytes = 4096;
    double cap_mbps = 0.0;

    std::string variant = "libpaxos";
    char layout = 'a';

    std::map<std::string, NodeOverride> nodes;
    std::map<std::pair<std::string, std::string>, LinkOverride> links;

    std::string kill_node;  // empty = no failure
    double kill_at_s = 0.0;

    std::uint64_t cap_bytes_per_s() const {
        return static_cast<std::uint64_t>(std::llround(cap_mbps * 1e6 / 8.0));
    }
    SimTime horizon() const { return from_s(horizon_s); }
    SimTime kill_at() const {
        return static_cast<SimTime>(std::llround(kill_at_s * 1e9));
    }
};

inline bool known_variant(const std::string& v) {
    return v == "libpaxos" || v == "libpaxos_steering" || v == "spaxos" ||
           v == "openreplica" || v == "ringpaxos";
}

inline void validate(const Scenario& sc) {
    if (!known_variant(sc.variant))
        throw ConfigError("unknown variant '" + sc.variant + "'");
    if (sc.layout < 'a' || sc.layout > 'd')
        throw ConfigError("layout must be one of a..d");
    if (sc.clients == 0 || sc.outstanding == 0)
        throw ConfigError("clients and outstanding must be positive");
    if (sc.request_bytes == 0) throw ConfigError("request_bytes must be positive");
    if (sc.horizon_s == 0) throw ConfigError("horizon_s must be positive");
    if (sc.warmup_s + sc.cooldown_s >= sc.horizon_s)
        throw ConfigError("warmup plus cooldown must leave a measurement span");
    if (sc.cap_mbps < 0) throw ConfigError("cap_mbps must be non-negative");
    for (const auto& [name, ov] : sc.nodes) {
        if (!ov.cpu_class.empty() && ov.cpu_class != "small" &&
            ov.cpu_class != "micro" && ov.cpu_class != "large")
            throw ConfigError("node '" + name + "': cpu_class must be small, micro or large");
    }
    for (const auto& [pair, ov] : sc.links) {
        if (ov.rtt_ms < 0)
            throw ConfigError("link '" + pair.first + "." + pair.second +
                              "': rtt_ms must be positive");
    }
    if (!sc.kill_node.empty() &&
        (sc.kill_at_s <= 0 || sc.kill_at_s >= sc.horizon_s))
        throw ConfigError("kill_at_s must fall inside the run");
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_num(const std::string& v, int line) {
    std::istringstream in(v);
    T out{};
    in >> out;
    if (in.fail() || !(in >> std::ws).eof())
        throw ParseError(line, "bad numeric value '" + v + "'");
    return out;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
    Scenario sc;
    std::string section;
    NodeOverride* cur_node = nullptr;
    LinkOverride* cur_link = nullptr;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(lineno, "unterminated section");
            section = line.substr(1, line.size() - 2);
            cur_node = nullptr;
            cur_link = nullptr;
            if (section.rfind("node.", 0) == 0) {
                const std::string name = section.substr(5);
                if (name.empty()) throw ParseError(lineno, "node section needs a name");
                cur_node = &sc.nodes[name];
            } else if (section.rfind("link.", 0) == 0) {
                const std::string rest = section.substr(5);
                const auto dot = rest.find('.');
                if (dot == std::string::npos || dot == 0 || dot + 1 == rest.size())
                    throw ParseError(lineno, "link section needs two node names");
                cur_link = &sc.links[{rest.substr(0, dot), rest.substr(dot + 1)}];
            } else if (section != "scenario" && section != "failure") {
                throw ParseError(lineno, "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (section.empty()) throw ParseError(lineno, "key outside any section");

        if (section == "scenario") {
            if (key == "horizon_s") sc.horizon_s = detail::parse_num<std::uint32_t>(val, lineno);
            else if (key == "seed") sc.seed = detail::parse_num<std::uint64_t>(val, lineno);
            else if (key == "warmup_s") sc.warmup_s = detail::parse_num<std::uint32_t>(val, lineno);
            else if (key == "cooldown_s") sc.cooldown_s = detail::parse_num<std::uint32_t>(val, lineno);
            else if (key == "name") sc.name = val;
            else if (key == "clients") sc.clients = detail::parse_num<std::uint16_t>(val, lineno);
            else if (key == "outstanding") sc.outstanding = detail::parse_num<std::uint16_t>(val, lineno);
            else if (key == "request_bytes") sc.request_bytes = detail::parse_num<std::uint32_t>(val, lineno);
            else if (key == "cap_mbps") sc.cap_mbps = detail::parse_num<double>(val, lineno);
            else if (key == "variant") sc.variant = val;
            else if (key == "layout") {
                if (val.size() != 1) throw ParseError(lineno, "layout must be a single letter");
                sc.layout = val[0];
            } else throw ParseError(lineno, "unknown key '" + key + "' in [scenario]");
        } else if (cur_node) {
            if (key == "cpu_class") cur_node->cpu_class = val;
            else if (key == "region") cur_node->region = val;
            else throw ParseError(lineno, "unknown key '" + key + "' in [" + section + "]");
        } else if (cur_link) {
            if (key == "rtt_ms") cur_link->rtt_ms = detail::parse_num<double>(val, lineno);
            else if (key == "bandwidth_mbps") cur_link->bandwidth_mbps = detail::parse_num<double>(val, lineno);
            else throw ParseError(lineno, "unknown key '" + key + "' in [" + section + "]");
        } else {  // failure
            if (key == "kill_node") sc.kill_node = val;
            else if (key == "kill_at_s") sc.kill_at_s = detail::parse_num<double>(val, lineno);
            else throw ParseError(lineno, "unknown key '" + key + "' in [failure]");
        }
    }
    validate(sc);
    return sc;
}

inline std::string render_scenario(const Scenario& sc) {
    std::ostringstream out;
    out << "[scenario]\n"
        << "name = " << sc.name << "\n"
        << "horizon_s = " << sc.horizon_s << "\n"
        << "seed = " << sc.seed << "\n"
        << "warmup_s = " << sc.warmup_s << "\n"
        << "cooldown_s = " << sc.cooldown_s << "\n"
        << "clients = " << sc.clients << "\n"
        << "outstanding = " << sc.outstanding << "\n"
        << "request_bytes = " << sc.request_bytes << "\n"
        << "cap_mbps = " << sc.cap_mbps << "\n"
        << "variant = " << sc.variant << "\n"
        << "layout = " << sc.layout << "\n";
    for (const auto& [name, ov] : sc.nodes) {
        out << "\n[node." << name << "]\n";
        if (!ov.cpu_class.empty()) out << "cpu_class = " << ov.cpu_class << "\n";
        if (!ov.region.empty()) out << "region = " << ov.region << "\n";
    }
    for (const auto& [pair, ov] : sc.links) {
        out << "\n[link." << pair.first << "." << pair.second << "]\n";
        if (ov.rtt_ms > 0) out << "rtt_ms = " << ov.rtt_ms << "\n";
        if (ov.bandwidth_mbps >= 0) out << "bandwidth_mbps = " << ov.bandwidth_mbps << "\n";
    }
    if (!sc.kill_node.empty()) {
        out << "\n[failure]\n"
            << "kill_node = " << sc.kill_node << "\n"
            << "kill_at_s = " << sc.kill_at_s << "\n";
    }
    return out.str();
}

}  // namespace paxsim
