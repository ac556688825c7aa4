#pragma once

#include <cstdint>
#include <vector>

#include "paxsim/time.hpp"
#include "paxsim/topology.hpp"

namespace paxsim {

// Every protocol message pays this much framing on the wire.
constexpr std::uint32_t kHeaderBytes = 64;
// Control messages (acks, id-only phases, decisions without a value) are one
// header's worth of bytes.
constexpr std::uint32_t kControlBytes = 64;

enum class MsgKind : std::uint8_t {
    kClientRequest,   // client -> entry node, carries request payload
    kClientBatch,     // proxy batch of requests
    kForward,         // request/batch dissemination between replicas
    kForwardAck,      // possession acknowledgement (S-Paxos)
    kPhase1A,
    kPhase1B,
    kPhase2A,
    kPhase2B,
    kDecision,        // decision notice (ring circulation, value by reference)
    kRingPass,        // ring segment carrier: 2A + accumulated votes
    kResponse,        // responder -> client
};

struct Ballot {
    std::uint32_t round = 0;
    NodeId proposer = kNoNode;

    bool operator==(const Ballot& o) const {
        return round == o.round && proposer == o.proposer;
    }
    bool operator<(const Ballot& o) const {
        if (round != o.round) return round < o.round;
        return proposer < o.proposer;
    }
    bool operator<=(const Ballot& o) const { return *this < o || *this == o; }
};

using ValueId = std::uint32_t;
constexpr ValueId kNoValue = 0xffffffffu;
using InstanceId = std::uint32_t;
constexpr InstanceId kNoInstance = 0xffffffffu;

// One client request inside a value.
struct RequestRef {
    std::uint16_t client = 0;
    std::uint32_t seq = 0;
};

// Values are interned once per run; messages carry ids plus modeled sizes so
// the hot path never copies payloads.
struct ValueRec {
    std::uint32_t payload_bytes = 0;
    std::vector<RequestRef> requests;
};

class ValueStore {
public:
    ValueId intern(ValueRec rec) {
        values_.push_back(std::move(rec));
        return static_cast<ValueId>(values_.size() - 1);
    }
    const ValueRec& at(ValueId id) const { return values_[id]; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<ValueRec> values_;
};

struct Msg {
    MsgKind kind = MsgKind::kClientRequest;
    NodeId from = kNoNode;
    NodeId to = kNoNode;
    std::uint32_t size = 0;  // wire bytes including header
    InstanceId instance = kNoInstance;
    Ballot ballot;
    ValueId value = kNoValue;
    std::uint32_t batch = 0;       // dissemination id (S-Paxos), ring epoch, misc
    std::uint16_t client = 0;
    std::uint32_t client_seq = 0;
    std::uint8_t vote_mask = 0;    // accumulated 2B votes on a ring segment
    SimTime tx_start = 0;          // set by the network when serialization begins
};

inline std::uint32_t wire_size(std::uint32_t payload_bytes) {
    return payload_bytes + kHeaderBytes;
}

}  // namespace paxsim
