#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "paxsim/clients.hpp"
#include "paxsim/errors.hpp"
#include "paxsim/events.hpp"
#include "paxsim/message.hpp"
#include "paxsim/metrics.hpp"
#include "paxsim/network.hpp"
#include "paxsim/paxos.hpp"
#include "paxsim/scenario.hpp"
#include "paxsim/sim.hpp"

namespace paxsim {

constexpr SimTime kMaintTick = from_ms(100);
constexpr SimTime kRetxInitial = from_ms(500);
constexpr SimTime kRetxCap = from_s(16);
// A duplicate 2A is not re-acked while this much of the previous ack is
// still sitting unsent in our own buffers.
constexpr std::uint64_t kDupSuppressBytes = 64 * 1024;
constexpr std::uint32_t kProxyBatchBytes = 12 * 1024;
constexpr SimTime kProxyFlushTimeout = from_ms(5);

// One consensus deployment: owns the protocol state machines and wires them
// to the network. The runner routes arch-specific events here.
class Arch : public NetListener, public Frontend {
public:
    struct Ctx {
        EventQueue<Ev>& q;
        Network& net;
        Metrics& metrics;
        ClientDriver& clients;
        std::uint64_t seed;
    };

    explicit Arch(Ctx ctx) : ctx_(ctx) {}
    ~Arch() override = default;

    virtual void build(const Scenario& sc) = 0;
    virtual void start() = 0;
    virtual void on_crash(NodeId) {}
    virtual void on_arch_event(const Ev&) {}

    virtual NodeId leader() const = 0;
    virtual std::vector<NodeId> acceptor_nodes() const = 0;
    // Nodes whose failure the deployment is expected to ride out.
    virtual std::vector<NodeId> killable() const = 0;

protected:
    Msg ctl(MsgKind k, NodeId to, InstanceId i, Ballot b) const {
        Msg m;
        m.kind = k;
        m.to = to;
        m.size = kControlBytes;
        m.instance = i;
        m.ballot = b;
        return m;
    }

    Msg val_msg(MsgKind k, NodeId to, InstanceId i, Ballot b, ValueId v,
                std::uint32_t payload) const {
        Msg m = ctl(k, to, i, b);
        m.size = wire_size(payload);
        m.value = v;
        return m;
    }

    Ctx ctx_;
    ValueStore store_;
};

// Per-instance proposal ledger on the coordinating node: what was proposed
// where, and when to retransmit. The watermark keeps the undecided scan
// bounded by the in-flight window.
class LeaderBooks {
public:
    struct Book {
        ValueId value = kNoValue;
        std::uint8_t targets = 0;      // acceptor-index mask
        std::uint32_t step = 0;        // steering tag
        bool probe = false;
        bool decided = false;
        SimTime next_retx = 0;
        SimTime rto = kRetxInitial;
    };

    Book& open(InstanceId i, ValueId v, std::uint8_t targets, SimTime now) {
        if (books_.size() <= i) books_.resize(i + 1);
        Book& b = books_[i];
        b.value = v;
        b.targets = targets;
        b.next_retx = now + kRetxInitial;
        b.rto = kRetxInitial;
        return b;
    }

    Book& at(InstanceId i) { return books_[i]; }
    bool known(InstanceId i) const { return i < books_.size(); }

    void mark_decided(InstanceId i) {
        if (books_.size() <= i) books_.resize(i + 1);
        books_[i].decided = true;
        while (first_unresolved_ < books_.size() && books_[first_unresolved_].decided)
            ++first_unresolved_;
    }

    // Visits undecided instances; fn decides whether to retransmit.
    template <typename Fn>
    void for_each_undecided(Fn&& fn) {
        for (InstanceId i = first_unresolved_; i < books_.size(); ++i)
            if (!books_[i].decided && books_[i].value != kNoValue) fn(i, books_[i]);
    }

    std::uint8_t pending_target_mask() const {
        std::uint8_t m = 0;
        for (InstanceId i = first_unresolved_; i < books_.size(); ++i)
            if (!books_[i].decided && books_[i].value != kNoValue) m |= books_[i].targets;
        return m;
    }

    InstanceId first_unresolved() const { return first_unresolved_; }
    InstanceId size() const { return static_cast<InstanceId>(books_.size()); }

private:
    std::vector<Book> books_;
    InstanceId first_unresolved_ = 0;
};

// Client-side batching proxies: a handful of lightweight batchers between
// the client population and the entry node. Flushes at the byte threshold
// or after the flush timeout, whichever comes first.
class ProxyBank {
public:
    ProxyBank(EventQueue<Ev>& q, unsigned n_proxies, std::uint32_t batch_bytes,
              std::function<void(ValueRec)> emit)
        : q_(q), batch_bytes_(batch_bytes), emit_(std::move(emit)),
          bufs_(n_proxies) {}

    void add(std::uint16_t client, std::uint32_t seq, std::uint32_t bytes) {
        Buf& b = bufs_[client % bufs_.size()];
        b.rec.payload_bytes += bytes;
        b.rec.requests.push_back({client, seq});
        if (b.rec.payload_bytes >= batch_bytes_) {
            flush(b);
        } else if (!b.armed) {
            b.armed = true;
            q_.schedule(q_.now() + kProxyFlushTimeout,
                        Ev{Ev::K::kProxyFlush, kNoNode,
                           static_cast<std::uint16_t>(client % bufs_.size()), 0, Msg{}});
        }
    }

    void on_flush_timer(std::uint16_t proxy) {
        Buf& b = bufs_[proxy];
        b.armed = false;
        if (b.rec.payload_bytes > 0) flush(b);
    }

private:
    struct Buf {
        ValueRec rec;
        bool armed = false;
    };

    void flush(Buf& b) {
        emit_(std::move(b.rec));
        b.rec = ValueRec{};
    }

    EventQueue<Ev>& q_;
    std::uint32_t batch_bytes_;
    std::function<void(ValueRec)> emit_;
    std::vector<Buf> bufs_;
};

}  // namespace paxsim
