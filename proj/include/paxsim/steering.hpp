#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "paxsim/errors.hpp"
#include "paxsim/time.hpp"

namespace paxsim {

// Quorum steering: each step opens with a probe window (2A to every
// acceptor) that measures who lands in the first quorum, then a steering
// window sends 2A only to the best f+1. A selected acceptor that stops
// acking while work is pending advances the plan to a fresh step.
constexpr std::uint32_t kProbeWindow = 100;
constexpr std::uint32_t kSteerWindow = 900;
constexpr SimTime kSuspicionTimeout = kSecond;

class SteeringPlan {
public:
    struct Alloc {
        std::uint8_t targets = 0;
        std::uint32_t step = 0;
        bool probe = true;
    };

    SteeringPlan(unsigned n_acceptors, unsigned f, SimTime now)
        : n_(n_acceptors),
          f_(f),
          counts_(n_acceptors, 0),
          last_2b_(n_acceptors, now) {
        PAXSIM_BUG(n_ <= 8, "steering mask is 8 bits");
        PAXSIM_BUG(f_ + 1 <= n_, "quorum larger than acceptor set");
    }

    std::uint8_t all_mask() const {
        return static_cast<std::uint8_t>((1u << n_) - 1u);
    }

    // Target set for the next fresh instance; advances the window position.
    Alloc allocate() {
        if (pos_ >= kProbeWindow + kSteerWindow) roll_step();
        Alloc a;
        a.step = step_;
        if (pos_ < kProbeWindow) {
            a.probe = true;
            a.targets = all_mask();
        } else {
            if (!selected_valid_) select();
            a.probe = false;
            a.targets = selected_;
        }
        ++pos_;
        return a;
    }

    void on_phase2b(unsigned acceptor_idx, SimTime now) {
        last_2b_[acceptor_idx] = now;
    }

    // Probe-window decisions feed the counters; stale steps are ignored.
    void on_first_quorum(std::uint32_t step, bool probe, std::uint8_t quorum_mask) {
        if (step != step_ || !probe) return;
        for (unsigned i = 0; i < n_; ++i)
            if (quorum_mask & (1u << i)) ++counts_[i];
    }

    // pending_mask: acceptors that sit in the target set of at least one
    // undecided instance. Returns true when the plan moved to a new step;
    // the caller must then re-issue 2A for every undecided instance.
    bool check_suspicion(SimTime now, std::uint8_t pending_mask) {
        if (!selected_valid_) return false;
        for (unsigned i = 0; i < n_; ++i) {
            if (!(selected_ & (1u << i))) continue;
            if (!(pending_mask & (1u << i))) continue;
            if (now - last_2b_[i] >= kSuspicionTimeout) {
                begin_step(now);
                return true;
            }
        }
        return false;
    }

    std::uint32_t step() const { return step_; }
    bool in_probe() const { return pos_ <= kProbeWindow; }
    std::uint8_t selected() const { return selected_valid_ ? selected_ : all_mask(); }
    const std::vector<std::uint32_t>& counts() const { return counts_; }

private:
    // Top f+1 by probe count, ties broken toward the lower index.
    void select() {
        std::vector<unsigned> order(n_);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](unsigned a, unsigned b) {
            return counts_[a] > counts_[b];
        });
        selected_ = 0;
        for (unsigned k = 0; k < f_ + 1; ++k)
            selected_ |= static_cast<std::uint8_t>(1u << order[k]);
        selected_valid_ = true;
    }

    void roll_step() {
        ++step_;
        pos_ = 0;
        selected_valid_ = false;
        std::fill(counts_.begin(), counts_.end(), 0u);
    }

    void begin_step(SimTime now) {
        roll_step();
        std::fill(last_2b_.begin(), last_2b_.end(), now);
    }

    unsigned n_, f_;
    std::uint32_t step_ = 0;
    std::uint32_t pos_ = 0;
    std::uint8_t selected_ = 0;
    bool selected_valid_ = false;
    std::vector<std::uint32_t> counts_;
    std::vector<SimTime> last_2b_;
};

}  // namespace paxsim
