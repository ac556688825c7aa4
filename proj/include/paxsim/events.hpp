#pragma once

#include <cstdint>

#include "paxsim/message.hpp"
#include "paxsim/topology.hpp"

namespace paxsim {

// Single event payload for the whole simulation. Kept flat and POD-ish so the
// queue never allocates per event.
struct Ev {
    enum class K : std::uint8_t {
        kNetArrival,      // message finished wire transit; node = receiver
        kCpuDone,         // node finished its current work item
        kRetryTick,       // per-channel retry timer (NONBLOCK_RETRY); aux = channel
        kClientSubmit,    // client issues its next request; client field set
        kAdmissionRetry,  // deferred submission re-attempt at window boundary
        kProxyFlush,      // client-proxy batch timer fired
        kResponseArrive,  // response reached the client
        kCrash,           // failure schedule: kill node
        kMaintenance,     // proposer periodic scan (retransmit, suspicion, steps)
        kRingTimer,       // ring membership timer; aux: 0 = session expiry, 1 = reconfig done
        kSample,          // periodic buffer-occupancy sampling
    };

    K k{};
    NodeId node = kNoNode;
    std::uint16_t client = 0;
    std::uint32_t aux = 0;
    Msg msg{};
};

}  // namespace paxsim
