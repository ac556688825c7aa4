#include <gtest/gtest.h>

#include "paxsim/metrics.hpp"

namespace paxsim {
namespace {

TEST(Metrics, WindowsAreOneSecondHalfOpen) {
    Metrics m;
    m.on_decision(0, 1, 1'000'000, from_ms(500));
    m.on_decision(1, 2, 250'000, from_s(1));  // lands in window 1, not 0
    EXPECT_DOUBLE_EQ(m.window_mbps(0), 8.0);
    EXPECT_DOUBLE_EQ(m.window_mbps(1), 2.0);
    EXPECT_DOUBLE_EQ(m.window_mbps(7), 0.0);
    EXPECT_EQ(m.decisions_total(), 2u);
}

TEST(Metrics, RepeatedDecisionCountsOnce) {
    Metrics m;
    m.on_decision(0, 5, 4096, from_ms(100));
    m.on_decision(0, 5, 4096, from_ms(900));  // second observer, same value
    EXPECT_EQ(m.decisions_total(), 1u);
    EXPECT_EQ(m.windows()[0].instances, 1u);
    EXPECT_TRUE(m.audit().ok());
}

TEST(Metrics, ConflictingDecisionTripsAgreement) {
    Metrics m;
    m.on_decision(3, 5, 4096, from_ms(100));
    m.on_decision(3, 6, 4096, from_ms(200));
    EXPECT_FALSE(m.audit().agreement_ok);
    EXPECT_NE(m.audit().detail.find("instance 3"), std::string::npos);
}

TEST(Metrics, DeliveryOrderAuditPerObserver) {
    Metrics m;
    m.on_delivered(1, 0);
    m.on_delivered(2, 0);  // observers keep separate cursors
    m.on_delivered(1, 1);
    EXPECT_TRUE(m.audit().prefix_ok);
    m.on_delivered(2, 2);  // observer 2 skipped instance 1
    EXPECT_FALSE(m.audit().prefix_ok);
}

TEST(Metrics, DuplicateResponseTripsUniqueness) {
    Metrics m;
    m.on_response(4, 7, 0, from_us(750));
    EXPECT_TRUE(m.audit().ok());
    EXPECT_EQ(m.latencies().size(), 1u);
    m.on_response(4, 7, 0, from_us(900));
    EXPECT_FALSE(m.audit().responses_unique);
    EXPECT_EQ(m.latencies().size(), 1u);  // duplicate adds no sample
}

TEST(Metrics, LongestGapCountsTheEdges) {
    Metrics m;
    m.on_decision(0, 1, 8, from_s(1));
    m.on_decision(1, 1, 8, from_ms(2500));
    m.on_decision(2, 1, 8, from_s(7));
    // Gaps in [0, 10]: 1.0, 1.5, 4.5 and the trailing 3.0.
    EXPECT_EQ(m.longest_gap(0, from_s(10)), from_ms(4500));
    // Restricting the range drops the interior gap.
    EXPECT_EQ(m.longest_gap(0, from_s(2)), from_s(1));
    // An empty range scores its full length.
    Metrics empty;
    EXPECT_EQ(empty.longest_gap(from_s(3), from_s(10)), from_s(7));
}

TEST(Metrics, DowntimeSumsOnlyLargeGaps) {
    Metrics m;
    m.on_decision(0, 1, 8, from_s(1));
    m.on_decision(1, 1, 8, from_ms(2500));
    m.on_decision(2, 1, 8, from_s(7));
    // min_gap 2 s keeps the 4.5 s gap and the trailing 3 s.
    EXPECT_EQ(m.downtime(0, from_s(10), from_s(2)), from_ms(7500));
    EXPECT_EQ(m.downtime(0, from_s(10), from_s(5)), 0);
}

TEST(Metrics, NearestRankPercentiles) {
    Metrics m;
    for (int i = 1; i <= 100; ++i)
        m.on_response(0, static_cast<std::uint32_t>(i), 0, from_ms(i));
    const SimTime t1 = from_s(20);
    EXPECT_DOUBLE_EQ(m.latency_percentile_ms(50.0, 0, t1), 50.0);
    EXPECT_DOUBLE_EQ(m.latency_percentile_ms(99.0, 0, t1), 99.0);
    EXPECT_DOUBLE_EQ(m.latency_percentile_ms(100.0, 0, t1), 100.0);
    EXPECT_DOUBLE_EQ(m.latency_percentile_ms(1.0, 0, t1), 1.0);
    EXPECT_DOUBLE_EQ(m.latency_percentile_ms(99.0, 0, 0), 0.0);  // empty range
}

TEST(Metrics, MeanAndPeakOverWindows) {
    Metrics m;
    m.on_decision(0, 1, 1'000'000, from_ms(200));
    m.on_decision(1, 1, 3'000'000, from_ms(1200));
    m.on_decision(2, 1, 2'000'000, from_ms(2200));
    EXPECT_DOUBLE_EQ(m.mean_mbps(0, from_s(3)), 16.0);
    EXPECT_DOUBLE_EQ(m.peak_mbps(0, from_s(3)), 24.0);
    // Window 1 is excluded by a [0, 1) range.
    EXPECT_DOUBLE_EQ(m.peak_mbps(0, from_s(1)), 8.0);
}

TEST(Metrics, FirstQuorumCounters) {
    Metrics m;
    for (int i = 0; i < 3; ++i) m.on_first_quorum(0b011, false, from_ms(300));
    for (int i = 0; i < 2; ++i) m.on_first_quorum(0b101, true, from_ms(1300));
    EXPECT_EQ(m.first_quorum_total(0), 5u);
    EXPECT_EQ(m.first_quorum_total(1), 3u);
    EXPECT_EQ(m.first_quorum_total(2), 2u);
    EXPECT_EQ(m.first_quorum_steer(0), 2u);
    EXPECT_EQ(m.first_quorum_steer(1), 0u);
    EXPECT_EQ(m.first_quorum_steer(2), 2u);
    EXPECT_EQ(m.first_quorum_in_window(0, 0), 3u);
    EXPECT_EQ(m.first_quorum_in_window(1, 2), 2u);
    EXPECT_EQ(m.first_quorum_in_window(5, 0), 0u);
}

TEST(Metrics, SummarizeMatchesPiecewiseQueries) {
    Metrics m;
    m.on_decision(0, 1, 500'000, from_ms(400));
    m.on_decision(1, 1, 1'500'000, from_ms(1400));
    m.on_response(0, 0, 0, from_ms(3));
    const auto s = m.summarize(0, from_s(2));
    EXPECT_DOUBLE_EQ(s.peak_mbps, 12.0);
    EXPECT_DOUBLE_EQ(s.mean_mbps, 8.0);
    EXPECT_DOUBLE_EQ(s.p99_latency_ms, 3.0);
    EXPECT_DOUBLE_EQ(s.max_gap_s, 1.0);
    EXPECT_EQ(s.decisions_total, 2u);
}

TEST(Metrics, SamplesAreStoredVerbatim) {
    Metrics m;
    m.sample_buffer(from_s(1), "proposer", "acceptor1", 1024, 0);
    m.sample_quorum(from_s(1), "acceptor0", 17);
    ASSERT_EQ(m.buffer_samples().size(), 1u);
    EXPECT_EQ(m.buffer_samples()[0].node, "proposer");
    EXPECT_EQ(m.buffer_samples()[0].kernel_bytes, 1024u);
    ASSERT_EQ(m.quorum_samples().size(), 1u);
    EXPECT_EQ(m.quorum_samples()[0].first_quorum_count, 17u);
}

}  // namespace
}  // namespace paxsim
