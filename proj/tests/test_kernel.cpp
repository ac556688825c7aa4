#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "paxsim/rng.hpp"
#include "paxsim/sim.hpp"
#include "paxsim/time.hpp"

namespace paxsim {
namespace {

TEST(Time, Conversions) {
    EXPECT_EQ(from_us(1), 1'000);
    EXPECT_EQ(from_ms(1), 1'000'000);
    EXPECT_EQ(from_s(1), 1'000'000'000);
    EXPECT_DOUBLE_EQ(to_seconds(from_ms(1500)), 1.5);
}

TEST(Time, TransferRoundsUp) {
    // 1e9/25e6 = 40 ns per byte, exact.
    EXPECT_EQ(transfer_ns(4096, 25'000'000), 163'840);
    EXPECT_EQ(transfer_ns(1, 1), 1'000'000'000);
    // 10 bytes at 3 B/s: ceil(1e10/3) = 3333333334.
    EXPECT_EQ(transfer_ns(10, 3), 3'333'333'334);
    EXPECT_EQ(transfer_ns(0, 100), 0);
    EXPECT_EQ(transfer_ns(100, 0), 0);  // unconstrained resource
}

TEST(Rng, SameSeedSameLabelSameSequence) {
    RngStream a(42, "svc/node0");
    RngStream b(42, "svc/node0");
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsAreIndependent) {
    RngStream probe(7, "beta");
    std::vector<std::uint64_t> expected;
    for (int i = 0; i < 50; ++i) expected.push_back(probe.next_u64());

    // Interleaving draws on another stream must not perturb this one.
    RngStream noisy(7, "alpha");
    RngStream fresh(7, "beta");
    for (int i = 0; i < 50; ++i) {
        noisy.next_u64();
        noisy.next_u64();
        EXPECT_EQ(fresh.next_u64(), expected[i]);
    }
}

TEST(Rng, DifferentLabelsDiffer) {
    RngStream a(1, "x");
    RngStream b(1, "y");
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    EXPECT_EQ(same, 0);
}

TEST(Rng, UniformMeanAndBounds) {
    RngStream r(9, "uniform");
    double sum = 0;
    for (int i = 0; i < 20'000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 20'000, 0.5, 0.02);
}

TEST(Rng, NextBelow) {
    RngStream r(3, "bounds");
    for (int i = 0; i < 1000; ++i) EXPECT_LT(r.next_below(17), 17u);
    EXPECT_EQ(r.next_below(0), 0u);
    EXPECT_EQ(r.next_below(1), 0u);
}

TEST(EventQueue, DispatchesInTimeOrder) {
    EventQueue<std::string> q;
    q.schedule(30, "c");
    q.schedule(10, "a");
    q.schedule(20, "b");
    std::string order;
    q.run_until(100, [&](SimTime, const std::string& s) { order += s; });
    EXPECT_EQ(order, "abc");
    EXPECT_EQ(q.now(), 100);
}

TEST(EventQueue, EqualTimesRunInScheduleOrder) {
    EventQueue<int> q;
    for (int i = 0; i < 10; ++i) q.schedule(5, i);
    std::vector<int> seen;
    q.run_until(5, [&](SimTime, int v) { seen.push_back(v); });
    for (int i = 0; i < 10; ++i) EXPECT_EQ(seen[i], i);
}

TEST(EventQueue, CancelSuppressesAndIsIdempotent) {
    EventQueue<int> q;
    q.schedule(1, 1);
    const EventHandle h = q.schedule(2, 2);
    q.schedule(3, 3);
    EXPECT_TRUE(q.cancel(h));
    EXPECT_FALSE(q.cancel(h));
    int sum = 0;
    q.run_until(10, [&](SimTime, int v) { sum += v; });
    EXPECT_EQ(sum, 4);
}

TEST(EventQueue, HorizonSplitsRuns) {
    EventQueue<int> q;
    q.schedule(10, 1);
    q.schedule(20, 2);
    EXPECT_EQ(q.run_until(15, [](SimTime, int) {}), 1u);
    EXPECT_EQ(q.now(), 15);
    EXPECT_EQ(q.run_until(25, [](SimTime, int) {}), 1u);
    EXPECT_TRUE(q.empty());
}

TEST(EventQueue, SchedulingInThePastThrows) {
    EventQueue<int> q;
    q.schedule(10, 1);
    q.run_until(50, [](SimTime, int) {});
    EXPECT_THROW(q.schedule(49, 2), PastEventError);
    EXPECT_NO_THROW(q.schedule(50, 3));  // "now" is allowed
}

TEST(EventQueue, HandlerMayScheduleAtNow) {
    // The closed-loop client pattern: completing a slot respawns it at the
    // current instant and the new event must still run in this run_until.
    EventQueue<int> q;
    q.schedule(10, 3);
    int fired = 0;
    q.run_until(10, [&](SimTime now, int v) {
        ++fired;
        if (v > 0) q.schedule(now, v - 1);
    });
    EXPECT_EQ(fired, 4);
}

TEST(EventQueue, PendingCount) {
    EventQueue<int> q;
    EXPECT_TRUE(q.empty());
    q.schedule(1, 1);
    q.schedule(2, 2);
    EXPECT_EQ(q.pending(), 2u);
    q.run_until(1, [](SimTime, int) {});
    EXPECT_EQ(q.pending(), 1u);
}

}  // namespace
}  // namespace paxsim
