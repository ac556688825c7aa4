#include <gtest/gtest.h>

#include <set>

#include "paxsim/presets.hpp"
#include "paxsim/scenario.hpp"

namespace paxsim {
namespace {

void expect_same(const Scenario& a, const Scenario& b) {
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.horizon_s, b.horizon_s);
    EXPECT_EQ(a.warmup_s, b.warmup_s);
    EXPECT_EQ(a.cooldown_s, b.cooldown_s);
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.clients, b.clients);
    EXPECT_EQ(a.outstanding, b.outstanding);
    EXPECT_EQ(a.request_bytes, b.request_bytes);
    EXPECT_DOUBLE_EQ(a.cap_mbps, b.cap_mbps);
    EXPECT_EQ(a.variant, b.variant);
    EXPECT_EQ(a.layout, b.layout);
    EXPECT_TRUE(a.nodes == b.nodes);
    EXPECT_TRUE(a.links == b.links);
    EXPECT_EQ(a.kill_node, b.kill_node);
    EXPECT_DOUBLE_EQ(a.kill_at_s, b.kill_at_s);
}

TEST(Scenario, EmptyTextYieldsDefaults) {
    const Scenario sc = parse_scenario("");
    expect_same(sc, Scenario{});
}

TEST(Scenario, ParsesAllSections) {
    const Scenario sc = parse_scenario(
        "[scenario]\n"
        "name = demo\n"
        "horizon_s = 60\n"
        "seed = 9\n"
        "warmup_s = 5\n"
        "cooldown_s = 5\n"
        "clients = 12\n"
        "outstanding = 3\n"
        "request_bytes = 200\n"
        "cap_mbps = 12.5\n"
        "variant = ringpaxos\n"
        "layout = d\n"
        "[node.acceptor2]\n"
        "cpu_class = micro\n"
        "region = useast1b\n"
        "[link.proposer.acceptor2]\n"
        "rtt_ms = 82\n"
        "bandwidth_mbps = 15\n"
        "[failure]\n"
        "kill_node = acceptor1\n"
        "kill_at_s = 30.5\n");
    EXPECT_EQ(sc.name, "demo");
    EXPECT_EQ(sc.horizon_s, 60u);
    EXPECT_EQ(sc.seed, 9u);
    EXPECT_EQ(sc.clients, 12u);
    EXPECT_EQ(sc.outstanding, 3u);
    EXPECT_EQ(sc.request_bytes, 200u);
    EXPECT_DOUBLE_EQ(sc.cap_mbps, 12.5);
    EXPECT_EQ(sc.variant, "ringpaxos");
    EXPECT_EQ(sc.layout, 'd');
    ASSERT_EQ(sc.nodes.count("acceptor2"), 1u);
    EXPECT_EQ(sc.nodes.at("acceptor2").cpu_class, "micro");
    EXPECT_EQ(sc.nodes.at("acceptor2").region, "useast1b");
    const auto key = std::make_pair(std::string("proposer"), std::string("acceptor2"));
    ASSERT_EQ(sc.links.count(key), 1u);
    EXPECT_DOUBLE_EQ(sc.links.at(key).rtt_ms, 82.0);
    EXPECT_DOUBLE_EQ(sc.links.at(key).bandwidth_mbps, 15.0);
    EXPECT_EQ(sc.kill_node, "acceptor1");
    EXPECT_DOUBLE_EQ(sc.kill_at_s, 30.5);
}

TEST(Scenario, CommentsAndWhitespaceAreIgnored) {
    const Scenario sc = parse_scenario(
        "# top comment\n"
        "\n"
        "  [scenario]   \n"
        "  clients=7   # trailing note\n"
        "\tcap_mbps =\t2\n");
    EXPECT_EQ(sc.clients, 7u);
    EXPECT_DOUBLE_EQ(sc.cap_mbps, 2.0);
}

TEST(Scenario, UnitConversions) {
    Scenario sc;
    sc.cap_mbps = 30.0;
    EXPECT_EQ(sc.cap_bytes_per_s(), 3'750'000u);
    sc.kill_at_s = 60.5;
    EXPECT_EQ(sc.kill_at(), from_ms(60'500));
    sc.horizon_s = 42;
    EXPECT_EQ(sc.horizon(), from_s(42));
}

TEST(Scenario, ParseErrorsCarryLineNumbers) {
    try {
        parse_scenario("[scenario]\nhorizon_s = 10\nbogus_key = 1\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line, 3);
    }
    EXPECT_THROW(parse_scenario("[nosuch]\n"), ParseError);
    EXPECT_THROW(parse_scenario("[scenario\n"), ParseError);
    EXPECT_THROW(parse_scenario("clients = 5\n"), ParseError);  // outside a section
    EXPECT_THROW(parse_scenario("[scenario]\nhorizon_s = ten\n"), ParseError);
    EXPECT_THROW(parse_scenario("[scenario]\nhorizon_s\n"), ParseError);
    EXPECT_THROW(parse_scenario("[scenario]\nlayout = ab\n"), ParseError);
    EXPECT_THROW(parse_scenario("[node.]\n"), ParseError);       // no name
    EXPECT_THROW(parse_scenario("[link.solo]\n"), ParseError);   // one endpoint
    EXPECT_THROW(parse_scenario("[link.a.]\n"), ParseError);     // empty endpoint
    EXPECT_THROW(parse_scenario("[node.x]\nspeed = 9\n"), ParseError);
    EXPECT_THROW(parse_scenario("[link.a.b]\nrtt = 9\n"), ParseError);
}

TEST(Scenario, ValidationRejectsImpossibleConfigs) {
    EXPECT_THROW(parse_scenario("[scenario]\nvariant = raft\n"), ConfigError);
    EXPECT_THROW(parse_scenario("[scenario]\nlayout = e\n"), ConfigError);
    EXPECT_THROW(parse_scenario("[scenario]\nclients = 0\n"), ConfigError);
    EXPECT_THROW(parse_scenario("[scenario]\nrequest_bytes = 0\n"), ConfigError);
    EXPECT_THROW(parse_scenario("[scenario]\nhorizon_s = 15\n"), ConfigError);  // warmup+cooldown
    EXPECT_THROW(parse_scenario("[scenario]\ncap_mbps = -1\n"), ConfigError);
    EXPECT_THROW(parse_scenario("[node.a]\ncpu_class = xlarge\n"), ConfigError);
    EXPECT_THROW(parse_scenario("[link.a.b]\nrtt_ms = -3\n"), ConfigError);
    EXPECT_THROW(parse_scenario("[failure]\nkill_node = acceptor1\n"), ConfigError);
    EXPECT_THROW(
        parse_scenario("[failure]\nkill_node = acceptor1\nkill_at_s = 500\n"),
        ConfigError);
}

TEST(Scenario, RenderParsesBackIdentically) {
    Scenario sc;
    sc.name = "roundtrip";
    sc.horizon_s = 77;
    sc.seed = 1234567;
    sc.clients = 9;
    sc.cap_mbps = 29.5;
    sc.variant = "spaxos";
    sc.layout = 'b';
    sc.nodes["replica1"] = NodeOverride{"large", ""};
    sc.nodes["replica0"] = NodeOverride{"", "uswest2c"};
    sc.links[{"replica0", "replica2"}] = LinkOverride{41.5, 15.0};
    sc.links[{"replica1", "replica2"}] = LinkOverride{0, 0};  // uncapped, default rtt
    sc.kill_node = "replica2";
    sc.kill_at_s = 35;
    expect_same(parse_scenario(render_scenario(sc)), sc);
}

TEST(Presets, SixtyDistinctNamesAllRoundTrip) {
    const auto names = preset_names();
    EXPECT_EQ(names.size(), 60u);
    EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 60u);
    for (const auto& n : names) {
        const Scenario sc = preset(n);
        EXPECT_EQ(sc.name, n);
        expect_same(parse_scenario(render_scenario(sc)), sc);
    }
}

TEST(Presets, FieldsFollowTheNamingScheme) {
    const Scenario sc = preset("config_b_4k_libpaxos_steering");
    EXPECT_EQ(sc.layout, 'b');
    EXPECT_EQ(sc.request_bytes, 4096u);
    EXPECT_EQ(sc.variant, "libpaxos_steering");
    EXPECT_TRUE(sc.kill_node.empty());
    EXPECT_EQ(preset("config_d_200_ringpaxos").request_bytes, 200u);
    EXPECT_EQ(preset("config_c_100k_openreplica").request_bytes, 102'400u);
}

TEST(Presets, UnknownNamesThrow) {
    EXPECT_THROW(preset("nope"), ConfigError);
    EXPECT_THROW(preset("config_a"), ConfigError);
    EXPECT_THROW(preset("config_a_9k_libpaxos"), ConfigError);
    EXPECT_THROW(preset("config_a_4k_raft"), ConfigError);
}

TEST(Presets, DefaultVictimPerVariant) {
    EXPECT_EQ(default_victim("libpaxos"), "acceptor1");
    EXPECT_EQ(default_victim("libpaxos_steering"), "acceptor1");
    EXPECT_EQ(default_victim("ringpaxos"), "acceptor1");
    EXPECT_EQ(default_victim("spaxos"), "replica2");
    EXPECT_EQ(default_victim("openreplica"), "acceptor2");
}

}  // namespace
}  // namespace paxsim
