#pragma once

#include <cstdint>
#include <queue>
#include <unordered_map>
#include <utility>
#include <vector>

#include "paxsim/errors.hpp"
#include "paxsim/time.hpp"

namespace paxsim {

struct EventHandle {
    std::uint64_t seq = 0;
};

// Discrete-event queue. Dispatch order is (fire_at, insertion seq): two events
// with equal fire times run in the order they were scheduled, which is the
// only tie-break and makes every run a pure function of the inputs.
template <typename Payload>
class EventQueue {
public:
    SimTime now() const { return now_; }
    std::size_t pending() const { return live_.size(); }
    bool empty() const { return live_.empty(); }

    EventHandle schedule(SimTime fire_at, Payload payload) {
        if (fire_at < now_)
            throw PastEventError("schedule at t=" + std::to_string(fire_at) +
                                 " before now=" + std::to_string(now_));
        const std::uint64_t seq = next_seq_++;
        heap_.push(Key{fire_at, seq});
        live_.emplace(seq, std::move(payload));
        return EventHandle{seq};
    }

    // True iff the event was still pending; cancelling a fired or already
    // cancelled event returns false and has no effect.
    bool cancel(EventHandle h) { return live_.erase(h.seq) > 0; }

    // Runs events with fire_at <= horizon, then advances the clock to the
    // horizon. Returns the number of events dispatched.
    template <typename Handler>
    std::size_t run_until(SimTime horizon, Handler&& handler) {
        std::size_t dispatched = 0;
        while (!heap_.empty() && heap_.top().fire_at <= horizon) {
            const Key k = heap_.top();
            heap_.pop();
            auto it = live_.find(k.seq);
            if (it == live_.end()) continue;  // cancelled
            Payload p = std::move(it->second);
            live_.erase(it);
            now_ = k.fire_at;
            ++dispatched;
            handler(now_, p);
        }
        if (horizon > now_) now_ = horizon;
        return dispatched;
    }

private:
    struct Key {
        SimTime fire_at;
        std::uint64_t seq;
        bool operator>(const Key& o) const {
            if (fire_at != o.fire_at) return fire_at > o.fire_at;
            return seq > o.seq;
        }
    };

    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Key, std::vector<Key>, std::greater<Key>> heap_;
    std::unordered_map<std::uint64_t, Payload> live_;
};

}  // namespace paxsim
