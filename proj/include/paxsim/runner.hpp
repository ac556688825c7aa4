#pragma once

#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "paxsim/arch.hpp"
#include "paxsim/arch_libpaxos.hpp"
#include "paxsim/arch_openreplica.hpp"
#include "paxsim/arch_ringpaxos.hpp"
#include "paxsim/arch_spaxos.hpp"
#include "paxsim/csv.hpp"
#include "paxsim/scenario.hpp"

namespace paxsim {

struct RunResult {
    Scenario scenario;
    Metrics metrics;
    Metrics::Summary summary;
    bool audits_ok = false;
    std::string audit_detail;
    std::vector<std::string> acceptor_names;
    std::vector<double> leader_util;         // busy fraction per 1 s window
    std::vector<double> leader_retry_share;  // retry share of busy time
    std::uint64_t events = 0;
    std::uint64_t submitted = 0;
    std::uint64_t completed = 0;
};

inline std::unique_ptr<Arch> make_arch(Arch::Ctx ctx, const Scenario& sc) {
    if (sc.variant == "libpaxos") return std::make_unique<LibpaxosArch>(ctx, false);
    if (sc.variant == "libpaxos_steering")
        return std::make_unique<LibpaxosArch>(ctx, true);
    if (sc.variant == "openreplica") return std::make_unique<OpenReplicaArch>(ctx);
    if (sc.variant == "spaxos") return std::make_unique<SPaxosArch>(ctx);
    if (sc.variant == "ringpaxos") return std::make_unique<RingPaxosArch>(ctx);
    throw ConfigError("unknown variant '" + sc.variant + "'");
}

inline RunResult run_scenario(const Scenario& sc) {
    validate(sc);
    RunResult r;
    r.scenario = sc;

    EventQueue<Ev> q;
    Network net(q, sc.seed);
    for (const auto& [name, ov] : sc.nodes) {
        NodeTweak t;
        if (!ov.cpu_class.empty()) {
            t.has_cls = true;
            t.cls = ov.cpu_class == "micro"   ? InstanceClass::kMicro
                    : ov.cpu_class == "large" ? InstanceClass::kLarge
                                              : InstanceClass::kSmall;
        }
        t.region = ov.region;
        net.tweak_node(name, t);
    }
    for (const auto& [pair, ov] : sc.links) {
        LinkTweak t;
        if (ov.rtt_ms > 0) t.one_way = static_cast<SimTime>(std::llround(ov.rtt_ms * 5e5));
        if (ov.bandwidth_mbps >= 0)
            t.bandwidth_bps = static_cast<std::int64_t>(std::llround(ov.bandwidth_mbps * 1e6 / 8));
        net.tweak_link(pair.first, pair.second, t);
    }
    Metrics& metrics = r.metrics;
    ClientDriver driver(q, metrics,
                        WorkloadCfg{sc.clients, sc.outstanding, sc.request_bytes,
                                    sc.cap_bytes_per_s()},
                        sc.seed);
    auto arch = make_arch(Arch::Ctx{q, net, metrics, driver, sc.seed}, sc);
    arch->build(sc);
    net.set_listener(arch.get());
    driver.set_frontend(arch.get());

    for (const auto& [name, ov] : sc.nodes)
        if (net.by_name(name) == kNoNode)
            throw ConfigError("node override '" + name + "' is not in this cluster");
    for (const auto& [pair, ov] : sc.links)
        if (net.by_name(pair.first) == kNoNode || net.by_name(pair.second) == kNoNode)
            throw ConfigError("link override '" + pair.first + "." + pair.second +
                              "' names a node not in this cluster");

    if (!sc.kill_node.empty()) {
        const NodeId victim = net.by_name(sc.kill_node);
        if (victim == kNoNode)
            throw ConfigError("kill_node '" + sc.kill_node + "' is not in this cluster");
        q.schedule(sc.kill_at(), Ev{Ev::K::kCrash, victim, 0, 0, Msg{}});
    }

    arch->start();
    driver.start();
    q.schedule(kSecond, Ev{Ev::K::kSample, kNoNode, 0, 0, Msg{}});

    r.events = q.run_until(sc.horizon(), [&](SimTime now, const Ev& ev) {
        switch (ev.k) {
            case Ev::K::kNetArrival:
            case Ev::K::kCpuDone:
            case Ev::K::kRetryTick:
                net.on_event(ev);
                break;
            case Ev::K::kClientSubmit:
            case Ev::K::kAdmissionRetry:
            case Ev::K::kResponseArrive:
                driver.on_event(ev);
                break;
            case Ev::K::kCrash:
                net.crash(ev.node);
                arch->on_crash(ev.node);
                break;
            case Ev::K::kSample:
                for (NodeId n = 0; n < net.node_count(); ++n)
                    for (NodeId peer : net.peers_of(n)) {
                        const BufferStat occ = net.occupancy(n, peer);
                        metrics.sample_buffer(now, net.spec(n).name,
                                              net.spec(peer).name, occ.kernel_bytes,
                                              occ.app_bytes);
                    }
                if (now + kSecond <= sc.horizon())
                    q.schedule(now + kSecond, Ev{Ev::K::kSample, kNoNode, 0, 0, Msg{}});
                break;
            default:
                arch->on_arch_event(ev);
                break;
        }
    });

    const SimTime t0 = from_s(sc.warmup_s);
    const SimTime t1 = from_s(sc.horizon_s - sc.cooldown_s);
    r.summary = metrics.summarize(t0, t1);
    r.audits_ok = metrics.audit().ok();
    r.audit_detail = metrics.audit().detail;
    for (NodeId a : arch->acceptor_nodes()) r.acceptor_names.push_back(net.spec(a).name);

    const auto& busy = net.busy_windows(arch->leader());
    const auto& retry = net.retry_windows(arch->leader());
    for (std::size_t w = 0; w < busy.size(); ++w) {
        r.leader_util.push_back(static_cast<double>(busy[w]) / double(kSecond));
        r.leader_retry_share.push_back(
            busy[w] > 0 ? static_cast<double>(retry[w]) / static_cast<double>(busy[w])
                        : 0.0);
    }
    r.submitted = driver.submitted();
    r.completed = driver.completed();
    return r;
}

// -- CSV bundle --------------------------------------------------------------

inline void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        std::ostringstream out;
        out << "t_s,mbps,instances_per_s\n";
        const auto& w = r.metrics.windows();
        for (std::size_t i = 0; i < w.size(); ++i)
            out << i << ',' << fmt_fixed(r.metrics.window_mbps(i), 3) << ','
                << w[i].instances << '\n';
        write_text_file(dir / "throughput.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "t_s,latency_ms,client_id\n";
        for (const auto& s : r.metrics.latencies())
            out << fmt_seconds(s.at) << ','
                << fmt_fixed(static_cast<double>(s.latency) / 1e6, 3) << ','
                << s.client << '\n';
        write_text_file(dir / "latency.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "t_s,acceptor,first_quorum_count\n";
        for (std::size_t w = 0; w < r.scenario.horizon_s; ++w)
            for (std::size_t idx = 0; idx < r.acceptor_names.size(); ++idx)
                out << w << ',' << r.acceptor_names[idx] << ','
                    << r.metrics.first_quorum_in_window(w, static_cast<unsigned>(idx))
                    << '\n';
        write_text_file(dir / "quorum.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "t_s,node,peer,kernel_bytes,app_bytes\n";
        for (const auto& s : r.metrics.buffer_samples())
            out << (s.at / kSecond) << ',' << s.node << ',' << s.peer << ','
                << s.kernel_bytes << ',' << s.app_bytes << '\n';
        write_text_file(dir / "buffers.csv", out.str());
    }
    {
        std::ostringstream out;
        out << "peak_mbps,mean_mbps,p99_latency_ms,max_gap_s,decisions_total\n"
            << fmt_fixed(r.summary.peak_mbps, 3) << ','
            << fmt_fixed(r.summary.mean_mbps, 3) << ','
            << fmt_fixed(r.summary.p99_latency_ms, 3) << ','
            << fmt_fixed(r.summary.max_gap_s, 3) << ',' << r.summary.decisions_total
            << '\n';
        write_text_file(dir / "summary.csv", out.str());
    }
    write_text_file(dir / "scenario.txt", render_scenario(r.scenario));
}

// -- campaign helpers ----------------------------------------------------------

struct SweepPoint {
    double kill_s = 0;
    double downtime_s = 0;
    double pre_kill_mbps = 0;
    std::uint64_t decisions = 0;
    bool audits_ok = false;
};

// Reruns the base scenario once per kill time, measuring decision downtime
// from the kill to the end of the run. The horizon stretches with the kill
// time so the recovery fits inside the run.
inline std::vector<SweepPoint> sweep_kill_times(Scenario base,
                                                const std::vector<double>& kill_times,
                                                bool steering) {
    base.variant = steering ? "libpaxos_steering" : "libpaxos";
    std::vector<SweepPoint> out;
    for (double k : kill_times) {
        Scenario sc = base;
        sc.kill_at_s = k;
        const std::uint32_t need =
            static_cast<std::uint32_t>(k + k * 0.8 + 40.0);
        sc.horizon_s = std::max(sc.horizon_s, need);
        const RunResult r = run_scenario(sc);
        SweepPoint p;
        p.kill_s = k;
        p.downtime_s = to_seconds(r.metrics.longest_gap(sc.kill_at(), sc.horizon()));
        p.pre_kill_mbps = r.metrics.mean_mbps(from_s(sc.warmup_s), sc.kill_at());
        p.decisions = r.summary.decisions_total;
        p.audits_ok = r.audits_ok;
        out.push_back(p);
    }
    return out;
}

// Sustained throughput of the uncapped system, post-warmup.
inline double measure_peak(Scenario base) {
    base.cap_mbps = 0;
    base.kill_node.clear();
    const RunResult r = run_scenario(base);
    return r.summary.mean_mbps;
}

}  // namespace paxsim
