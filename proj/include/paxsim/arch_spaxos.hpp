#pragma once

#include <deque>
#include <optional>
#include <unordered_map>

#include "paxsim/arch.hpp"

namespace paxsim {

constexpr std::uint32_t kSpxBatchBytes = 1024;

// Three symmetric replicas over blocking sockets; every replica batches its
// own clients' requests, disseminates batches to the others, and acks every
// batch it holds to everyone. A batch is stable once f+1 replicas are known
// to hold it. The leader replica then orders stable batch ids through 64 B
// 2A/2B rounds; a replica executes a batch once it is ordered, stable and
// locally present, and the batch's origin replica answers its clients.
class SPaxosArch : public Arch {
public:
    explicit SPaxosArch(Ctx ctx) : Arch(ctx) {}

    void build(const Scenario& sc) override {
        for (int i = 0; i < 3; ++i) {
            NodeSpec r;
            r.name = "replica" + std::to_string(i);
            r.cls = (sc.layout == 'b' && i == 2) ? InstanceClass::kMicro
                    : (sc.layout == 'c' && i == 0) ? InstanceClass::kLarge
                                                   : InstanceClass::kSmall;
            r.roles = static_cast<std::uint8_t>(Role::kProposer) |
                      static_cast<std::uint8_t>(Role::kAcceptor) |
                      static_cast<std::uint8_t>(Role::kLearner);
            r.region = sc.layout == 'd' && i == 1   ? "uswest2c"
                       : sc.layout == 'd' && i == 2 ? "useast1b"
                                                    : "uswest2b";
            replicas_.push_back(ctx_.net.add_node(r));
        }
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                ctx_.net.connect(replicas_[i], replicas_[j], Discipline::kBlocking);
        ballot_ = Ballot{1, replicas_[0]};
        rep_.resize(3);
    }

    void start() override {
        ctx_.q.schedule(kMaintTick, Ev{Ev::K::kMaintenance, replicas_[0], 0, 0, Msg{}});
        // Leader self-promise plus one remote 1B reaches quorum.
        rep_[0].acc.on_phase1a(ballot_, 0, kPhase1Window);
        promises_ = 1;
        for (int i = 1; i < 3; ++i)
            ctx_.net.send(replicas_[0], ctl(MsgKind::kPhase1A, replicas_[i], 0, ballot_));
    }

    NodeId leader() const override { return replicas_[0]; }
    std::vector<NodeId> acceptor_nodes() const override { return replicas_; }
    std::vector<NodeId> killable() const override {
        return {replicas_[1], replicas_[2]};
    }

    void client_submit(std::uint16_t client, std::uint32_t seq,
                       std::uint32_t bytes) override {
        const unsigned o = client % 3;
        if (!ctx_.net.alive(replicas_[o])) return;  // orphaned client slot
        Msg m;
        m.kind = MsgKind::kClientRequest;
        m.size = wire_size(bytes);
        m.client = client;
        m.client_seq = seq;
        ctx_.net.inject(replicas_[o], m, kClientOneWay);
    }

    void on_arch_event(const Ev& ev) override {
        switch (ev.k) {
            case Ev::K::kProxyFlush: {
                Rep& r = rep_[ev.client];
                r.batch_armed = false;
                if (r.batch.payload_bytes > 0 && ctx_.net.alive(replicas_[ev.client]))
                    flush_batch(ev.client);
                break;
            }
            case Ev::K::kMaintenance:
                maintenance();
                ctx_.q.schedule(ctx_.q.now() + kMaintTick,
                                Ev{Ev::K::kMaintenance, replicas_[0], 0, 0, Msg{}});
                break;
            default:
                break;
        }
    }

    void on_message(NodeId at, const Msg& m) override {
        const unsigned x = rep_index(at);
        switch (m.kind) {
            case MsgKind::kClientRequest: {
                Rep& r = rep_[x];
                r.batch.payload_bytes += m.size - kHeaderBytes;
                r.batch.requests.push_back({m.client, m.client_seq});
                if (r.batch.payload_bytes >= kSpxBatchBytes) {
                    flush_batch(x);
                } else if (!r.batch_armed) {
                    r.batch_armed = true;
                    ctx_.q.schedule(ctx_.q.now() + kProxyFlushTimeout,
                                    Ev{Ev::K::kProxyFlush, at,
                                       static_cast<std::uint16_t>(x), 0, Msg{}});
                }
                break;
            }
            case MsgKind::kForward: {
                const unsigned o = rep_index(m.from);
                BatchSt& b = rep_[x].batches[m.batch];
                b.present = true;
                b.possess |= bit(o) | bit(x);
                for (unsigned y = 0; y < 3; ++y) {
                    if (y == x || !ctx_.net.alive(replicas_[y])) continue;
                    Msg ack = ctl(MsgKind::kForwardAck, replicas_[y], kNoInstance, ballot_);
                    ack.batch = m.batch;
                    ctx_.net.send(at, ack);
                }
                after_possession(x, m.batch);
                try_exec(x);
                break;
            }
            case MsgKind::kForwardAck:
                rep_[x].batches[m.batch].possess |= bit(rep_index(m.from));
                after_possession(x, m.batch);
                try_exec(x);
                break;
            case MsgKind::kPhase1A: {
                const Phase1BMsg r = rep_[x].acc.on_phase1a(m.ballot, 0, kPhase1Window);
                Msg reply = ctl(MsgKind::kPhase1B, m.from, 0, r.ballot);
                reply.batch = r.promised ? 1 : 0;
                ctx_.net.send(at, reply);
                break;
            }
            case MsgKind::kPhase1B:
                if (m.batch == 1 && m.ballot == ballot_ && !ready_ &&
                    ++promises_ >= f_ + 1) {
                    ready_ = true;
                    while (!pre_order_.empty()) {
                        propose_order(pre_order_.front());
                        pre_order_.pop_front();
                    }
                }
                break;
            case MsgKind::kPhase2A: {
                const Phase2BMsg r = rep_[x].acc.on_phase2a(m.ballot, m.instance, m.value);
                if (!r.accepted) break;
                on_vote(x, x, m.instance, r.ballot, m.value);
                for (unsigned y = 0; y < 3; ++y) {
                    if (y == x || !ctx_.net.alive(replicas_[y])) continue;
                    Msg voteMsg = ctl(MsgKind::kPhase2B, replicas_[y], m.instance, r.ballot);
                    voteMsg.batch = 1;
                    voteMsg.value = m.value;
                    ctx_.net.send(at, voteMsg);
                }
                break;
            }
            case MsgKind::kPhase2B:
                if (m.batch == 1)
                    on_vote(x, rep_index(m.from), m.instance, m.ballot, m.value);
                break;
            default:
                PAXSIM_BUG(false, "unexpected message at replica");
        }
    }

    void on_executed(NodeId at, const Msg& m) override {
        const unsigned x = rep_index(at);
        if (origin_.at(m.batch) != x) return;
        for (const RequestRef& r : store_.at(m.value).requests)
            ctx_.clients.send_response(r.client, r.seq);
    }

private:
    static constexpr unsigned f_ = 1;

    struct BatchSt {
        bool present = false;
        std::uint8_t possess = 0;
        bool order_enqueued = false;  // leader-side
    };

    struct Rep {
        Acceptor acc;
        QuorumTracker tracker{1};
        std::unordered_map<std::uint32_t, BatchSt> batches;
        InstanceId exec_next = 0;
        ValueRec batch;  // the batch being accumulated from local clients
        bool batch_armed = false;
    };

    static std::uint8_t bit(unsigned i) { return static_cast<std::uint8_t>(1u << i); }

    unsigned rep_index(NodeId n) const {
        for (unsigned i = 0; i < replicas_.size(); ++i)
            if (replicas_[i] == n) return i;
        PAXSIM_BUG(false, "message at unknown replica");
        return 0;
    }

    void flush_batch(unsigned o) {
        Rep& r = rep_[o];
        const std::uint32_t bid = next_batch_++;
        const std::uint32_t bytes = r.batch.payload_bytes;
        values_.push_back(store_.intern(std::move(r.batch)));
        origin_.push_back(static_cast<std::uint8_t>(o));
        r.batch = ValueRec{};
        BatchSt& st = r.batches[bid];
        st.present = true;
        st.possess |= bit(o);
        for (unsigned y = 0; y < 3; ++y) {
            if (y == o || !ctx_.net.alive(replicas_[y])) continue;
            Msg f = val_msg(MsgKind::kForward, replicas_[y], kNoInstance, ballot_,
                            values_[bid], bytes);
            f.batch = bid;
            ctx_.net.send(replicas_[o], f);
        }
        after_possession(o, bid);
    }

    // Stability is the leader's precondition for ordering a batch.
    void after_possession(unsigned x, std::uint32_t bid) {
        if (x != 0) return;
        BatchSt& b = rep_[0].batches[bid];
        if (b.order_enqueued || popcount(b.possess) < f_ + 1) return;
        b.order_enqueued = true;
        if (!ready_) pre_order_.push_back(bid);
        else propose_order(bid);
    }

    void propose_order(std::uint32_t bid) {
        const InstanceId i = next_instance_++;
        books_.open(i, bid, 0x7, ctx_.q.now());
        send_order_2a(i, bid);
    }

    void send_order_2a(InstanceId i, std::uint32_t bid) {
        const Phase2BMsg own = rep_[0].acc.on_phase2a(ballot_, i, bid);
        PAXSIM_BUG(own.accepted, "leader acceptor rejected its own ballot");
        on_vote(0, 0, i, ballot_, bid);
        for (unsigned y = 1; y < 3; ++y) {
            if (!ctx_.net.alive(replicas_[y])) continue;
            Msg m = ctl(MsgKind::kPhase2A, replicas_[y], i, ballot_);
            m.value = bid;
            ctx_.net.send(replicas_[0], m);
        }
        // The leader's own vote also reaches the other learners.
        for (unsigned y = 1; y < 3; ++y) {
            if (!ctx_.net.alive(replicas_[y])) continue;
            Msg v = ctl(MsgKind::kPhase2B, replicas_[y], i, ballot_);
            v.batch = 1;
            v.value = bid;
            ctx_.net.send(replicas_[0], v);
        }
    }

    void on_vote(unsigned at, unsigned voter, InstanceId i, Ballot b, std::uint32_t bid) {
        const AckOutcome out = rep_[at].tracker.on_phase2b(i, voter, b, bid);
        if (out != AckOutcome::kDecided) return;
        if (at == 0) {
            books_.mark_decided(i);
            ctx_.metrics.on_first_quorum(rep_[0].tracker.at(i).first_quorum, false,
                                         ctx_.q.now());
        }
        try_exec(at);
    }

    // Ordered + stable + present, in instance order.
    void try_exec(unsigned x) {
        Rep& r = rep_[x];
        while (r.tracker.decided(r.exec_next)) {
            const std::uint32_t bid = r.tracker.at(r.exec_next).value;
            BatchSt& b = r.batches[bid];
            if (!b.present || popcount(b.possess) < f_ + 1) return;
            const ValueId v = values_[bid];
            ctx_.metrics.on_decision(r.exec_next, bid, store_.at(v).payload_bytes,
                                     ctx_.q.now());
            ctx_.metrics.on_delivered(replicas_[x], r.exec_next);
            Msg exec;
            exec.kind = MsgKind::kDecision;
            exec.size = wire_size(store_.at(v).payload_bytes);
            exec.instance = r.exec_next;
            exec.value = v;
            exec.batch = bid;
            ctx_.net.schedule_exec(replicas_[x], exec);
            ++r.exec_next;
        }
    }

    void maintenance() {
        if (!ready_) return;
        const SimTime now = ctx_.q.now();
        books_.for_each_undecided([&](InstanceId i, LeaderBooks::Book& b) {
            if (now < b.next_retx) return;
            send_order_2a(i, b.value);
            b.rto = std::min(b.rto * 2, kRetxCap);
            b.next_retx = now + b.rto;
        });
    }

    static unsigned popcount(std::uint8_t m) {
        unsigned c = 0;
        while (m) {
            c += m & 1u;
            m >>= 1;
        }
        return c;
    }

    std::vector<NodeId> replicas_;
    std::vector<Rep> rep_;
    std::vector<ValueId> values_;       // batch id -> interned content
    std::vector<std::uint8_t> origin_;  // batch id -> origin replica
    std::uint32_t next_batch_ = 0;

    Ballot ballot_;
    bool ready_ = false;
    unsigned promises_ = 0;
    std::deque<std::uint32_t> pre_order_;
    InstanceId next_instance_ = 0;
    LeaderBooks books_;
};

}  // namespace paxsim
