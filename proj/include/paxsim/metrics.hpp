#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "paxsim/message.hpp"
#include "paxsim/time.hpp"

namespace paxsim {

// Aggregates decisions, responses and samples into 1 s half-open windows
// aligned to t=0, and runs the safety audits as data arrives.
class Metrics {
public:
    struct Window {
        std::uint64_t payload_bytes = 0;
        std::uint32_t instances = 0;
    };

    struct LatencySample {
        SimTime at;
        SimTime latency;
        std::uint16_t client;
    };

    struct BufferSample {
        SimTime at;
        std::string node, peer;
        std::uint64_t kernel_bytes, app_bytes;
    };

    struct QuorumSample {
        SimTime at;
        std::string acceptor;
        std::uint64_t first_quorum_count;
    };

    struct Audit {
        bool agreement_ok = true;
        bool prefix_ok = true;
        bool responses_unique = true;
        std::string detail;

        bool ok() const { return agreement_ok && prefix_ok && responses_unique; }
    };

    struct Summary {
        double peak_mbps = 0;
        double mean_mbps = 0;
        double p99_latency_ms = 0;
        double max_gap_s = 0;
        std::uint64_t decisions_total = 0;
    };

    // -- decision path ----------------------------------------------------

    // Every observer reports; agreement is audited across all of them, but
    // throughput counts each instance once (first report wins).
    void on_decision(InstanceId instance, ValueId value, std::uint32_t payload_bytes,
                     SimTime now) {
        if (chosen_.size() <= instance) chosen_.resize(instance + 1, kNoValue);
        if (chosen_[instance] == kNoValue) {
            chosen_[instance] = value;
            window(now).payload_bytes += payload_bytes;
            window(now).instances += 1;
            decision_times_.push_back(now);
            ++decisions_total_;
        } else if (chosen_[instance] != value && audit_.agreement_ok) {
            audit_.agreement_ok = false;
            audit_.detail = "instance " + std::to_string(instance) +
                            " decided twice with different values";
        }
    }

    // Learner delivery order audit: per observer, instances must come out
    // as a gap-free increasing sequence.
    void on_delivered(NodeId observer, InstanceId instance) {
        auto [it, fresh] = next_expected_.try_emplace(observer, 0u);
        if (instance != it->second && audit_.prefix_ok) {
            audit_.prefix_ok = false;
            audit_.detail = "observer " + std::to_string(observer) +
                            " delivered instance " + std::to_string(instance) +
                            " expecting " + std::to_string(it->second);
        }
        it->second = instance + 1;
    }

    // -- client path -------------------------------------------------------

    void on_response(std::uint16_t client, std::uint32_t seq, SimTime submitted,
                     SimTime now) {
        const std::uint64_t key = (std::uint64_t(client) << 32) | seq;
        if (!answered_.insert(key).second) {
            if (audit_.responses_unique) {
                audit_.responses_unique = false;
                audit_.detail = "client " + std::to_string(client) + " seq " +
                                std::to_string(seq) + " answered twice";
            }
            return;
        }
        latencies_.push_back({now, now - submitted, client});
    }

    // -- quorum composition -------------------------------------------------

    void on_first_quorum(std::uint8_t quorum_mask, bool steer_phase, SimTime now) {
        const std::size_t w = static_cast<std::size_t>(now / kSecond);
        for (unsigned i = 0; i < 8; ++i) {
            if (!(quorum_mask & (1u << i))) continue;
            if (fq_windows_.size() <= w) fq_windows_.resize(w + 1);
            if (fq_windows_[w].size() <= i) fq_windows_[w].resize(i + 1, 0u);
            ++fq_windows_[w][i];
            if (fq_total_.size() <= i) fq_total_.resize(i + 1, 0u);
            ++fq_total_[i];
            if (steer_phase) {
                if (fq_steer_.size() <= i) fq_steer_.resize(i + 1, 0u);
                ++fq_steer_[i];
            }
        }
    }

    // -- samples appended by the runner --------------------------------------

    void sample_buffer(SimTime at, std::string node, std::string peer,
                       std::uint64_t kernel, std::uint64_t app) {
        buffer_samples_.push_back({at, std::move(node), std::move(peer), kernel, app});
    }

    void sample_quorum(SimTime at, std::string acceptor, std::uint64_t count) {
        quorum_samples_.push_back({at, std::move(acceptor), count});
    }

    // -- queries --------------------------------------------------------------

    const std::vector<Window>& windows() const { return windows_; }
    const std::vector<LatencySample>& latencies() const { return latencies_; }
    const std::vector<BufferSample>& buffer_samples() const { return buffer_samples_; }
    const std::vector<QuorumSample>& quorum_samples() const { return quorum_samples_; }
    const std::vector<SimTime>& decision_times() const { return decision_times_; }
    const Audit& audit() const { return audit_; }
    std::uint64_t decisions_total() const { return decisions_total_; }
    std::uint64_t first_quorum_total(unsigned idx) const {
        return idx < fq_total_.size() ? fq_total_[idx] : 0;
    }
    std::uint64_t first_quorum_steer(unsigned idx) const {
        return idx < fq_steer_.size() ? fq_steer_[idx] : 0;
    }
    std::uint64_t first_quorum_in_window(std::size_t w, unsigned idx) const {
        if (w >= fq_windows_.size() || idx >= fq_windows_[w].size()) return 0;
        return fq_windows_[w][idx];
    }

    double window_mbps(std::size_t w) const {
        if (w >= windows_.size()) return 0.0;
        return static_cast<double>(windows_[w].payload_bytes) * 8.0 / 1e6;
    }

    // Longest silence between decisions inside [t0, t1], counting the edges:
    // a run that never decides in the range scores the full range.
    SimTime longest_gap(SimTime t0, SimTime t1) const {
        SimTime prev = t0, worst = 0;
        for (SimTime t : decision_times_) {
            if (t < t0) continue;
            if (t > t1) break;
            worst = std::max(worst, t - prev);
            prev = t;
        }
        return std::max(worst, t1 - prev);
    }

    // Total silence inside [t0, t1] from gaps of at least min_gap.
    SimTime downtime(SimTime t0, SimTime t1, SimTime min_gap) const {
        SimTime prev = t0, total = 0;
        for (SimTime t : decision_times_) {
            if (t < t0) continue;
            if (t > t1) break;
            if (t - prev >= min_gap) total += t - prev;
            prev = t;
        }
        if (t1 - prev >= min_gap) total += t1 - prev;
        return total;
    }

    // Mean throughput over [t0, t1) in Mb/s, whole windows only.
    double mean_mbps(SimTime t0, SimTime t1) const {
        const std::size_t w0 = static_cast<std::size_t>(t0 / kSecond);
        const std::size_t w1 = static_cast<std::size_t>(t1 / kSecond);
        if (w1 <= w0) return 0.0;
        std::uint64_t bytes = 0;
        for (std::size_t w = w0; w < w1 && w < windows_.size(); ++w)
            bytes += windows_[w].payload_bytes;
        return static_cast<double>(bytes) * 8.0 / 1e6 /
               static_cast<double>(w1 - w0);
    }

    double peak_mbps(SimTime t0, SimTime t1) const {
        const std::size_t w0 = static_cast<std::size_t>(t0 / kSecond);
        const std::size_t w1 = static_cast<std::size_t>(t1 / kSecond);
        double best = 0.0;
        for (std::size_t w = w0; w < w1 && w < windows_.size(); ++w)
            best = std::max(best, window_mbps(w));
        return best;
    }

    // Nearest-rank percentile over response latencies in [t0, t1], in ms.
    double latency_percentile_ms(double pct, SimTime t0, SimTime t1) const {
        std::vector<SimTime> v;
        for (const auto& s : latencies_)
            if (s.at >= t0 && s.at < t1) v.push_back(s.latency);
        if (v.empty()) return 0.0;
        std::sort(v.begin(), v.end());
        std::size_t rank = static_cast<std::size_t>(pct / 100.0 * v.size() + 0.5);
        if (rank == 0) rank = 1;
        if (rank > v.size()) rank = v.size();
        return static_cast<double>(v[rank - 1]) / 1e6;
    }

    Summary summarize(SimTime t0, SimTime t1) const {
        Summary s;
        s.peak_mbps = peak_mbps(t0, t1);
        s.mean_mbps = mean_mbps(t0, t1);
        s.p99_latency_ms = latency_percentile_ms(99.0, t0, t1);
        s.max_gap_s = to_seconds(longest_gap(t0, t1));
        s.decisions_total = decisions_total_;
        return s;
    }

private:
    Window& window(SimTime now) {
        const std::size_t w = static_cast<std::size_t>(now / kSecond);
        if (windows_.size() <= w) windows_.resize(w + 1);
        return windows_[w];
    }

    std::vector<Window> windows_;
    std::vector<ValueId> chosen_;
    std::vector<SimTime> decision_times_;
    std::vector<LatencySample> latencies_;
    std::vector<BufferSample> buffer_samples_;
    std::vector<QuorumSample> quorum_samples_;
    std::vector<std::vector<std::uint32_t>> fq_windows_;
    std::vector<std::uint64_t> fq_total_, fq_steer_;
    std::unordered_map<NodeId, InstanceId> next_expected_;
    std::unordered_set<std::uint64_t> answered_;
    Audit audit_;
    std::uint64_t decisions_total_ = 0;
};

}  // namespace paxsim
