#include <gtest/gtest.h>

#include "paxsim/steering.hpp"

namespace paxsim {
namespace {

TEST(SteeringPlan, ProbeWindowTargetsEveryone) {
    SteeringPlan p(3, 1, 0);
    for (std::uint32_t i = 0; i < kProbeWindow; ++i) {
        const auto a = p.allocate();
        EXPECT_TRUE(a.probe);
        EXPECT_EQ(a.targets, 0b111);
        EXPECT_EQ(a.step, 0u);
    }
    EXPECT_FALSE(p.allocate().probe);
}

TEST(SteeringPlan, SelectsTopQuorumByProbeCounts) {
    SteeringPlan p(3, 1, 0);
    for (std::uint32_t i = 0; i < kProbeWindow; ++i) p.allocate();
    // Acceptors 0 and 2 land in most first quorums; 1 in few.
    for (int i = 0; i < 10; ++i) p.on_first_quorum(0, true, 0b101);
    for (int i = 0; i < 3; ++i) p.on_first_quorum(0, true, 0b011);
    const auto a = p.allocate();
    EXPECT_FALSE(a.probe);
    EXPECT_EQ(a.targets, 0b101);
    EXPECT_EQ(p.selected(), 0b101);
    EXPECT_EQ(p.counts()[0], 13u);
    EXPECT_EQ(p.counts()[1], 3u);
    EXPECT_EQ(p.counts()[2], 10u);
}

TEST(SteeringPlan, TieBreaksTowardLowerIndex) {
    SteeringPlan p(3, 1, 0);
    for (std::uint32_t i = 0; i < kProbeWindow; ++i) p.allocate();
    // All three tie: the steer set must be {0, 1}.
    p.on_first_quorum(0, true, 0b111);
    EXPECT_EQ(p.allocate().targets, 0b011);
}

TEST(SteeringPlan, UnselectedBeforeFirstProbeResolves) {
    SteeringPlan p(3, 1, 0);
    EXPECT_EQ(p.selected(), 0b111);  // falls back to everyone
}

TEST(SteeringPlan, StaleAndSteerDecisionsAreIgnored) {
    SteeringPlan p(3, 1, 0);
    for (std::uint32_t i = 0; i < kProbeWindow; ++i) p.allocate();
    p.on_first_quorum(1, true, 0b011);   // wrong step
    p.on_first_quorum(0, false, 0b011);  // steer-window decision
    p.on_first_quorum(0, true, 0b110);
    EXPECT_EQ(p.allocate().targets, 0b110);
}

TEST(SteeringPlan, StepRollsAfterFullWindowAndResetsCounts) {
    SteeringPlan p(3, 1, 0);
    for (std::uint32_t i = 0; i < kProbeWindow + kSteerWindow; ++i) p.allocate();
    p.on_first_quorum(0, true, 0b101);  // wiped by the roll below
    const auto a = p.allocate();
    EXPECT_EQ(a.step, 1u);
    EXPECT_TRUE(a.probe);
    EXPECT_EQ(p.counts()[0], 0u);
    EXPECT_EQ(p.counts()[2], 0u);
}

TEST(SteeringPlan, SuspicionFiresOnlyForSelectedPendingSilence) {
    SteeringPlan p(3, 1, 0);
    for (std::uint32_t i = 0; i < kProbeWindow; ++i) p.allocate();
    p.on_first_quorum(0, true, 0b101);
    p.allocate();  // selection now {0, 2}
    const SimTime late = 2 * kSuspicionTimeout;
    p.on_phase2b(0, late);
    p.on_phase2b(1, late);  // silence of an unselected acceptor is fine

    // Acceptor 2 is silent but has no pending work: no suspicion.
    EXPECT_FALSE(p.check_suspicion(late, 0b001));
    // Pending work on silent selected acceptor 2: step advances.
    EXPECT_TRUE(p.check_suspicion(late, 0b100));
    EXPECT_EQ(p.step(), 1u);
    EXPECT_TRUE(p.allocate().probe);

    // The silence clock restarted at the step change: after re-selecting,
    // acceptor 2 is not suspected until a full timeout past `late`.
    for (std::uint32_t i = 1; i < kProbeWindow; ++i) p.allocate();
    p.on_first_quorum(1, true, 0b101);
    p.allocate();
    EXPECT_FALSE(p.check_suspicion(late + kSuspicionTimeout - 1, 0b111));
    EXPECT_TRUE(p.check_suspicion(late + kSuspicionTimeout, 0b111));
}

TEST(SteeringPlan, NoSuspicionBeforeSelection) {
    SteeringPlan p(3, 1, 0);
    EXPECT_FALSE(p.check_suspicion(10 * kSuspicionTimeout, 0b111));
}

TEST(SteeringPlan, RecentAckSuppressesSuspicion) {
    SteeringPlan p(3, 1, 0);
    for (std::uint32_t i = 0; i < kProbeWindow; ++i) p.allocate();
    p.on_first_quorum(0, true, 0b011);
    p.allocate();
    const SimTime t = kSuspicionTimeout - 1;
    EXPECT_FALSE(p.check_suspicion(t, 0b011));  // just under the timeout
    EXPECT_TRUE(p.check_suspicion(t + 1, 0b011));
}

}  // namespace
}  // namespace paxsim
