#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "paxsim/presets.hpp"
#include "paxsim/runner.hpp"

namespace paxsim {
namespace {

namespace fs = std::filesystem;

Scenario tiny(const std::string& variant, char layout) {
    Scenario sc;
    sc.name = "tiny";
    sc.horizon_s = 8;
    sc.warmup_s = 2;
    sc.cooldown_s = 2;
    sc.clients = 10;
    sc.outstanding = 4;
    sc.request_bytes = 4096;
    sc.variant = variant;
    sc.layout = layout;
    return sc;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

class EndToEnd : public ::testing::TestWithParam<const char*> {};

TEST_P(EndToEnd, FailureFreeRunDecidesAndPassesAudits) {
    const RunResult r = run_scenario(tiny(GetParam(), 'a'));
    EXPECT_TRUE(r.audits_ok) << r.audit_detail;
    EXPECT_GT(r.summary.decisions_total, 100u);
    EXPECT_GT(r.completed, 100u);
    EXPECT_GT(r.summary.mean_mbps, 0.0);
    EXPECT_EQ(r.acceptor_names.size(), 3u);
    // A healthy run never goes quiet for long.
    EXPECT_LT(r.summary.max_gap_s, 0.5);
}

INSTANTIATE_TEST_SUITE_P(AllVariants, EndToEnd,
                         ::testing::Values("libpaxos", "libpaxos_steering", "spaxos",
                                           "openreplica", "ringpaxos"));

TEST(EndToEndExtra, KillingAQuorumMemberStallsDecisions) {
    Scenario sc = tiny("libpaxos", 'b');
    sc.kill_node = "acceptor1";  // the fast healthy member
    sc.kill_at_s = 4;
    const RunResult r = run_scenario(sc);
    EXPECT_TRUE(r.audits_ok) << r.audit_detail;
    // The undersized member must first drain its send backlog before its
    // votes can complete quorums again.
    EXPECT_GT(to_seconds(r.metrics.longest_gap(sc.kill_at(), sc.horizon())), 0.5);
    EXPECT_GT(r.summary.decisions_total, 0u);
}

TEST(EndToEndExtra, UnknownKillNodeIsRejected) {
    Scenario sc = tiny("libpaxos", 'a');
    sc.kill_node = "acceptor9";
    sc.kill_at_s = 4;
    EXPECT_THROW(run_scenario(sc), ConfigError);
}

TEST(EndToEndExtra, OutputBundleHasTheFullSchema) {
    const fs::path dir = "e2e_bundle";
    fs::remove_all(dir);
    const RunResult r = run_scenario(tiny("libpaxos", 'a'));
    write_outputs(r, dir);
    const struct {
        const char* file;
        const char* header;
    } want[] = {
        {"throughput.csv", "t_s,mbps,instances_per_s"},
        {"latency.csv", "t_s,latency_ms,client_id"},
        {"quorum.csv", "t_s,acceptor,first_quorum_count"},
        {"buffers.csv", "t_s,node,peer,kernel_bytes,app_bytes"},
        {"summary.csv", "peak_mbps,mean_mbps,p99_latency_ms,max_gap_s,decisions_total"},
    };
    for (const auto& w : want) {
        const std::string text = slurp(dir / w.file);
        ASSERT_FALSE(text.empty()) << w.file;
        EXPECT_EQ(text.substr(0, text.find('\n')), w.header) << w.file;
    }
    // The scenario echo parses back to the run's scenario.
    const Scenario echoed = parse_scenario(slurp(dir / "scenario.txt"));
    EXPECT_EQ(echoed.variant, "libpaxos");
    EXPECT_EQ(echoed.horizon_s, 8u);
}

TEST(EndToEndExtra, SameSeedSameBytes) {
    Scenario sc = tiny("ringpaxos", 'b');
    sc.kill_node = "acceptor1";
    sc.kill_at_s = 4;
    sc.seed = 7;

    const fs::path a = "e2e_det_a", b = "e2e_det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    write_outputs(run_scenario(sc), a);
    write_outputs(run_scenario(sc), b);
    for (const char* f : {"throughput.csv", "latency.csv", "quorum.csv",
                          "buffers.csv", "summary.csv", "scenario.txt"}) {
        const std::string ta = slurp(a / f), tb = slurp(b / f);
        ASSERT_FALSE(ta.empty()) << f;
        EXPECT_EQ(ta, tb) << f;
    }
}

TEST(EndToEndExtra, DifferentSeedsDiverge) {
    Scenario sc = tiny("libpaxos", 'a');
    Scenario sc2 = sc;
    sc2.seed = 2;
    const RunResult r1 = run_scenario(sc), r2 = run_scenario(sc2);
    // Warmup jitter and CPU jitter reshuffle the whole schedule.
    EXPECT_NE(r1.metrics.decision_times(), r2.metrics.decision_times());
}

TEST(EndToEndExtra, CapSelfConsistency) {
    Scenario base = tiny("libpaxos", 'a');
    base.horizon_s = 10;
    const double peak = measure_peak(base);
    ASSERT_GT(peak, 1.0);

    Scenario capped = base;
    capped.cap_mbps = 0.7 * peak;
    const RunResult r = run_scenario(capped);
    EXPECT_GE(r.summary.mean_mbps, 0.65 * peak);
    EXPECT_LE(r.summary.mean_mbps, 0.75 * peak);
}

TEST(EndToEndExtra, LinkOverridesStretchCommitLatency) {
    Scenario sc = tiny("libpaxos", 'a');
    // Coast-to-coast RTT on every proposer<->acceptor link puts a 82 ms
    // floor under each decision (41 ms out, 41 ms back).
    for (const char* acc : {"acceptor0", "acceptor1", "acceptor2"})
        sc.links[{"proposer", acc}] = LinkOverride{82.0, 15.0};
    const RunResult r = run_scenario(sc);
    EXPECT_TRUE(r.audits_ok) << r.audit_detail;
    EXPECT_GT(r.summary.decisions_total, 0u);
    EXPECT_GT(r.summary.p99_latency_ms, 80.0);
}

TEST(EndToEndExtra, NodeOverrideReproducesTheMicroLayout) {
    // Downgrading acceptor1 by override turns layout a into exactly layout b,
    // so the two runs must agree event for event.
    Scenario forced = tiny("ringpaxos", 'a');
    forced.nodes["acceptor1"] = NodeOverride{"micro", ""};
    const RunResult rf = run_scenario(forced);
    const RunResult rn = run_scenario(tiny("ringpaxos", 'b'));
    EXPECT_TRUE(rf.audits_ok) << rf.audit_detail;
    EXPECT_EQ(rn.metrics.decision_times(), rf.metrics.decision_times());
    EXPECT_DOUBLE_EQ(rn.summary.mean_mbps, rf.summary.mean_mbps);

    // And the downgrade is consequential: the ring pays for its slowest hop.
    const RunResult ra = run_scenario(tiny("ringpaxos", 'a'));
    EXPECT_LT(rf.summary.mean_mbps, 0.8 * ra.summary.mean_mbps);
}

TEST(EndToEndExtra, UnknownOverrideNamesAreRejected) {
    Scenario sc = tiny("libpaxos", 'a');
    sc.nodes["acceptor9"] = NodeOverride{"micro", ""};
    EXPECT_THROW(run_scenario(sc), ConfigError);

    Scenario sc2 = tiny("libpaxos", 'a');
    sc2.links[{"proposer", "acceptor9"}] = LinkOverride{10.0, -1};
    EXPECT_THROW(run_scenario(sc2), ConfigError);
}

TEST(EndToEndExtra, SweepWithNoKillTimesIsEmpty) {
    Scenario base = tiny("libpaxos", 'b');
    base.kill_node = "acceptor1";
    EXPECT_TRUE(sweep_kill_times(base, {}, false).empty());
}

TEST(EndToEndExtra, PresetScenariosBuild) {
    // Every preset maps to a cluster the runner can instantiate; trim the
    // horizon so this stays a smoke test.
    for (const auto& n : preset_names()) {
        Scenario sc = preset(n);
        sc.horizon_s = 2;
        sc.warmup_s = 0;
        sc.cooldown_s = 1;
        sc.clients = 4;
        sc.outstanding = 1;
        const RunResult r = run_scenario(sc);
        EXPECT_TRUE(r.audits_ok) << n << ": " << r.audit_detail;
        EXPECT_GT(r.summary.decisions_total, 0u) << n;
    }
}

}  // namespace
}  // namespace paxsim
