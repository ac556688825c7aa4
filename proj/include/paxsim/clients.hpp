#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "paxsim/errors.hpp"
#include "paxsim/events.hpp"
#include "paxsim/metrics.hpp"
#include "paxsim/rng.hpp"
#include "paxsim/sim.hpp"
#include "paxsim/time.hpp"

namespace paxsim {

// Clients are lightweight actors: they inject requests over a fixed one-way
// latency and receive responses the same way, without occupying NICs or
// kernel buffers. The closed loop (outstanding slots per client) is what
// bounds the load they can put on the system.
constexpr SimTime kClientOneWay = from_us(750);
constexpr SimTime kAdmissionWindow = from_ms(100);
constexpr SimTime kWarmupJitterSpan = from_ms(100);

enum class AttachPolicy : std::uint8_t { kLeaderOnly, kRandomReplica, kProxy };

struct WorkloadCfg {
    std::uint16_t clients = 50;
    std::uint16_t outstanding = 8;
    std::uint32_t request_bytes = 4096;
    std::uint64_t cap_bytes_per_s = 0;  // admission cap on payload bytes, 0 = off
};

// Receives admitted client requests; implemented by each architecture.
class Frontend {
public:
    virtual ~Frontend() = default;
    virtual void client_submit(std::uint16_t client, std::uint32_t seq,
                               std::uint32_t bytes) = 0;
};

// Token-bucket style gate over 100 ms windows. A request that does not fit
// the current window's budget is deferred to the next boundary. An
// oversized request is let through on a fresh window so a small cap cannot
// wedge the workload entirely.
class AdmissionGate {
public:
    explicit AdmissionGate(std::uint64_t bytes_per_s) : cap_(bytes_per_s) {}

    // Returns 0 when admitted, else the time to retry at.
    SimTime try_admit(SimTime now, std::uint32_t bytes) {
        if (cap_ == 0) return 0;
        const std::int64_t w = now / kAdmissionWindow;
        if (w != window_) {
            window_ = w;
            used_ = 0;
        }
        const std::uint64_t quota = cap_ / (kSecond / kAdmissionWindow);
        if (used_ + bytes <= quota || used_ == 0) {
            used_ += bytes;
            return 0;
        }
        return (w + 1) * kAdmissionWindow;
    }

private:
    std::uint64_t cap_;
    std::int64_t window_ = -1;
    std::uint64_t used_ = 0;
};

// Closed-loop client population. Each of clients*outstanding slots submits,
// waits for its response, then immediately submits again. Slots whose
// response can never arrive (their attach point died) simply stay quiet.
class ClientDriver {
public:
    ClientDriver(EventQueue<Ev>& q, Metrics& metrics, WorkloadCfg cfg,
                 std::uint64_t seed)
        : q_(q), metrics_(metrics), cfg_(cfg), warmup_rng_(seed, "warmup") {}

    void set_frontend(Frontend* f) { frontend_ = f; }
    const WorkloadCfg& cfg() const { return cfg_; }

    // First submissions are spread over [0, 100 ms) so clients do not start
    // in lockstep.
    void start() {
        PAXSIM_BUG(frontend_ != nullptr, "driver started without a frontend");
        next_seq_.assign(cfg_.clients, 0);
        for (std::uint16_t c = 0; c < cfg_.clients; ++c)
            for (std::uint16_t s = 0; s < cfg_.outstanding; ++s) {
                const SimTime at = static_cast<SimTime>(
                    warmup_rng_.next_below(static_cast<std::uint64_t>(kWarmupJitterSpan)));
                q_.schedule(at, Ev{Ev::K::kClientSubmit, kNoNode, c, 0, Msg{}});
            }
    }

    bool handles(Ev::K k) const {
        return k == Ev::K::kClientSubmit || k == Ev::K::kAdmissionRetry ||
               k == Ev::K::kResponseArrive;
    }

    void on_event(const Ev& ev) {
        switch (ev.k) {
            case Ev::K::kClientSubmit: {
                const std::uint16_t c = ev.client;
                const std::uint32_t seq = next_seq_[c]++;
                pending_[key(c, seq)] = q_.now();
                attempt(c, seq);
                break;
            }
            case Ev::K::kAdmissionRetry:
                attempt(ev.client, ev.aux);
                break;
            case Ev::K::kResponseArrive:
                complete(ev.client, ev.aux);
                break;
            default:
                PAXSIM_BUG(false, "not a client event");
        }
    }

    // Architectures call this when a response leaves the serving node; the
    // slot turns around after the client-side one-way latency.
    void send_response(std::uint16_t client, std::uint32_t seq) {
        q_.schedule(q_.now() + kClientOneWay,
                    Ev{Ev::K::kResponseArrive, kNoNode, client, seq, Msg{}});
    }

    std::uint64_t submitted() const { return submitted_; }
    std::uint64_t completed() const { return completed_; }

private:
    static std::uint64_t key(std::uint16_t c, std::uint32_t s) {
        return (std::uint64_t(c) << 32) | s;
    }

    void attempt(std::uint16_t c, std::uint32_t seq) {
        const SimTime retry_at = gate().try_admit(q_.now(), cfg_.request_bytes);
        if (retry_at > 0) {
            q_.schedule(retry_at, Ev{Ev::K::kAdmissionRetry, kNoNode, c, seq, Msg{}});
            return;
        }
        ++submitted_;
        frontend_->client_submit(c, seq, cfg_.request_bytes);
    }

    void complete(std::uint16_t c, std::uint32_t seq) {
        auto it = pending_.find(key(c, seq));
        if (it == pending_.end()) {
            // Metrics flags the duplicate; no new slot is spawned for it.
            metrics_.on_response(c, seq, q_.now(), q_.now());
            return;
        }
        metrics_.on_response(c, seq, it->second, q_.now());
        pending_.erase(it);
        ++completed_;
        q_.schedule(q_.now(), Ev{Ev::K::kClientSubmit, kNoNode, c, 0, Msg{}});
    }

    AdmissionGate& gate() {
        if (!gate_) gate_.emplace(cfg_.cap_bytes_per_s);
        return *gate_;
    }

    EventQueue<Ev>& q_;
    Metrics& metrics_;
    WorkloadCfg cfg_;
    Frontend* frontend_ = nullptr;
    RngStream warmup_rng_;
    std::vector<std::uint32_t> next_seq_;
    std::unordered_map<std::uint64_t, SimTime> pending_;
    std::optional<AdmissionGate> gate_;
    std::uint64_t submitted_ = 0;
    std::uint64_t completed_ = 0;
};

}  // namespace paxsim
