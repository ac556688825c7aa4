#pragma once

#include <deque>
#include <memory>
#include <unordered_map>

#include "paxsim/arch.hpp"

namespace paxsim {

// Membership-service timings: a crashed member's session expires after 3 s,
// then installing the new ring takes another half second.
constexpr SimTime kSessionTimeout = from_s(3);
constexpr SimTime kReconfigPause = from_ms(500);

// Value flow along a ring: proxy-front -> coordinator -> acceptors -> learner.
// The coordinator self-votes and forwards the value with the accumulated vote
// mask; each acceptor adds its vote and passes it on; the learner treats a
// pass carrying f+1 votes as the decision, executes, answers clients and
// notifies the coordinator. Losing a ring member stalls the ring until the
// membership service expires the session and the coordinator re-proposes
// undecided instances at a higher ballot around the shortened ring.
class RingPaxosArch : public Arch {
public:
    explicit RingPaxosArch(Ctx ctx) : Arch(ctx) {}

    void build(const Scenario& sc) override {
        NodeSpec fp;
        fp.name = "proposer";
        fp.cls = InstanceClass::kSmall;
        fp.roles = static_cast<std::uint8_t>(Role::kProxy);
        fp.region = "uswest2b";
        front_ = ctx_.net.add_node(fp);
        for (int i = 0; i < 3; ++i) {
            NodeSpec a;
            a.name = "acceptor" + std::to_string(i);
            a.cls = (sc.layout == 'b' && i == 1) ? InstanceClass::kMicro
                    : (sc.layout == 'c' && i == 0) ? InstanceClass::kLarge
                                                   : InstanceClass::kSmall;
            a.roles = static_cast<std::uint8_t>(Role::kAcceptor);
            a.region = sc.layout == 'd' && i == 1   ? "uswest2c"
                       : sc.layout == 'd' && i == 2 ? "useast1b"
                                                    : "uswest2b";
            acceptors_.push_back(ctx_.net.add_node(a));
        }
        NodeSpec ln;
        ln.name = "learner";
        ln.cls = InstanceClass::kSmall;
        ln.roles = static_cast<std::uint8_t>(Role::kLearner);
        ln.region = "uswest2b";
        learner_ = ctx_.net.add_node(ln);

        ctx_.net.connect(front_, acceptors_[0], Discipline::kNonblockAppbuf);
        ctx_.net.connect(acceptors_[0], acceptors_[1], Discipline::kNonblockAppbuf);
        ctx_.net.connect(acceptors_[1], acceptors_[2], Discipline::kNonblockAppbuf);
        ctx_.net.connect(acceptors_[0], acceptors_[2], Discipline::kNonblockAppbuf);
        ctx_.net.connect(acceptors_[1], learner_, Discipline::kNonblockAppbuf);
        ctx_.net.connect(acceptors_[2], learner_, Discipline::kNonblockAppbuf);
        ctx_.net.connect(learner_, acceptors_[0], Discipline::kNonblockAppbuf);

        ballot_ = Ballot{1, acceptors_[0]};
        acc_.resize(3);
        rebuild_ring();
        proxies_ = std::make_unique<ProxyBank>(
            ctx_.q, std::max<unsigned>(1, sc.clients / 10), kProxyBatchBytes,
            [this](ValueRec rec) { submit_batch(std::move(rec)); });
    }

    void start() override {
        ctx_.q.schedule(kMaintTick, Ev{Ev::K::kMaintenance, acceptors_[0], 0, 0, Msg{}});
        begin_phase1();
    }

    NodeId leader() const override { return acceptors_[0]; }
    std::vector<NodeId> acceptor_nodes() const override { return acceptors_; }
    std::vector<NodeId> killable() const override {
        return {acceptors_[1], acceptors_[2]};
    }

    void client_submit(std::uint16_t client, std::uint32_t seq,
                       std::uint32_t bytes) override {
        proxies_->add(client, seq, bytes);
    }

    void on_crash(NodeId n) override {
        for (NodeId a : acceptors_)
            if (a == n)
                ctx_.q.schedule(ctx_.q.now() + kSessionTimeout,
                                Ev{Ev::K::kRingTimer, n, 0, 0, Msg{}});
    }

    void on_arch_event(const Ev& ev) override {
        switch (ev.k) {
            case Ev::K::kProxyFlush:
                proxies_->on_flush_timer(ev.client);
                break;
            case Ev::K::kMaintenance:
                maintenance();
                ctx_.q.schedule(ctx_.q.now() + kMaintTick,
                                Ev{Ev::K::kMaintenance, acceptors_[0], 0, 0, Msg{}});
                break;
            case Ev::K::kRingTimer:
                if (ev.aux == 0) {
                    // Session expired: install the shortened ring after the
                    // reconfiguration pause.
                    reconfiguring_ = true;
                    ready_ = false;
                    ctx_.q.schedule(ctx_.q.now() + kReconfigPause,
                                    Ev{Ev::K::kRingTimer, ev.node, 0, 1, Msg{}});
                } else {
                    rebuild_ring();
                    reconfiguring_ = false;
                    ballot_.round += 1;
                    begin_phase1();
                }
                break;
            default:
                break;
        }
    }

    void on_message(NodeId at, const Msg& m) override {
        if (at == learner_) {
            learner_msg(m);
        } else if (at == front_) {
            PAXSIM_BUG(m.kind == MsgKind::kClientBatch, "unexpected message at front");
            Msg pass = val_msg(MsgKind::kRingPass, acceptors_[0], kNoInstance, ballot_,
                               m.value, store_.at(m.value).payload_bytes);
            ctx_.net.send(front_, pass);
        } else {
            acceptor_msg(acc_index(at), m);
        }
    }

    void on_executed(NodeId, const Msg& m) override {
        for (const RequestRef& r : store_.at(m.value).requests)
            ctx_.clients.send_response(r.client, r.seq);
    }

private:
    static constexpr unsigned f_ = 1;

    unsigned acc_index(NodeId n) const {
        for (unsigned i = 0; i < acceptors_.size(); ++i)
            if (acceptors_[i] == n) return i;
        PAXSIM_BUG(false, "message at unknown acceptor");
        return 0;
    }

    static unsigned popcount(std::uint8_t m) {
        unsigned c = 0;
        while (m) {
            c += m & 1u;
            m >>= 1;
        }
        return c;
    }

    void submit_batch(ValueRec rec) {
        const std::uint32_t bytes = rec.payload_bytes;
        Msg m;
        m.kind = MsgKind::kClientBatch;
        m.size = wire_size(bytes);
        m.value = store_.intern(std::move(rec));
        ctx_.net.inject(front_, m, kClientOneWay);
    }

    // Ring order over the alive members; the learner terminates the ring.
    void rebuild_ring() {
        ring_.clear();
        ring_.push_back(acceptors_[0]);
        for (int i = 1; i < 3; ++i)
            if (ctx_.net.alive(acceptors_[i])) ring_.push_back(acceptors_[i]);
        ring_.push_back(learner_);
    }

    NodeId ring_succ(NodeId n) const {
        for (std::size_t i = 0; i + 1 < ring_.size(); ++i)
            if (ring_[i] == n) return ring_[i + 1];
        PAXSIM_BUG(false, "node has no ring successor");
        return kNoNode;
    }

    void begin_phase1() {
        const Phase1BMsg own = acc_[0].on_phase1a(ballot_, 0, kPhase1Window);
        PAXSIM_BUG(own.promised, "coordinator rejected its own ballot");
        promises_ = 1;
        p1_high_.clear();
        for (const AcceptedEntry& e : own.accepted) remember_accepted(e);
        unsigned alive_acceptors = 1;
        for (int i = 1; i < 3; ++i) {
            if (!ctx_.net.alive(acceptors_[i])) continue;
            ++alive_acceptors;
            ctx_.net.send(acceptors_[0],
                          ctl(MsgKind::kPhase1A, acceptors_[i], 0, ballot_));
        }
        PAXSIM_BUG(alive_acceptors >= f_ + 1, "ring lost its quorum");
        if (promises_ >= f_ + 1) become_ready();
    }

    void remember_accepted(const AcceptedEntry& e) {
        auto it = p1_high_.find(e.instance);
        if (it == p1_high_.end() || it->second.v_rnd < e.v_rnd) p1_high_[e.instance] = e;
    }

    void become_ready() {
        ready_ = true;
        // Re-propose every undecided instance, adopting the highest accepted
        // value discovered in Phase 1; decided-but-unobserved values survive
        // the member loss this way.
        books_.for_each_undecided([&](InstanceId i, LeaderBooks::Book& b) {
            auto it = p1_high_.find(i);
            if (it != p1_high_.end()) b.value = it->second.value;
            b.rto = kRetxInitial;
            b.next_retx = ctx_.q.now() + b.rto;
            start_pass(i, b.value);
        });
        while (!client_q_.empty()) {
            propose(client_q_.front());
            client_q_.pop_front();
        }
    }

    void propose(ValueId v) {
        const InstanceId i = next_instance_++;
        books_.open(i, v, 0x7, ctx_.q.now());
        start_pass(i, v);
    }

    void start_pass(InstanceId i, ValueId v) {
        const Phase2BMsg own = acc_[0].on_phase2a(ballot_, i, v);
        if (!own.accepted) return;  // a newer ballot exists; re-proposal owns it
        Msg pass = val_msg(MsgKind::kRingPass, ring_succ(acceptors_[0]), i, ballot_, v,
                           store_.at(v).payload_bytes);
        pass.vote_mask = 0x1;
        ctx_.net.send(acceptors_[0], pass);
    }

    void acceptor_msg(unsigned idx, const Msg& m) {
        const NodeId self = acceptors_[idx];
        switch (m.kind) {
            case MsgKind::kRingPass: {
                if (idx == 0) {
                    // Fresh value from the front.
                    if (!ready_ || reconfiguring_) client_q_.push_back(m.value);
                    else propose(m.value);
                    break;
                }
                const Phase2BMsg r = acc_[idx].on_phase2a(m.ballot, m.instance, m.value);
                if (!r.accepted) break;  // stale-ballot pass dies here
                Msg pass = m;
                pass.vote_mask |= static_cast<std::uint8_t>(1u << idx);
                pass.to = ring_succ(self);
                ctx_.net.send(self, pass);
                break;
            }
            case MsgKind::kPhase1A: {
                const Phase1BMsg r = acc_[idx].on_phase1a(m.ballot, 0, kPhase1Window);
                Msg reply = ctl(MsgKind::kPhase1B, acceptors_[0], 0, r.ballot);
                reply.batch = r.promised ? 1 : 0;
                reply.client = static_cast<std::uint16_t>(idx);
                ctx_.net.send(self, reply);
                break;
            }
            case MsgKind::kPhase1B: {
                PAXSIM_BUG(idx == 0, "1B routed to a non-coordinator");
                if (m.batch != 1 || !(m.ballot == ballot_) || ready_) break;
                // Content is read from the responder's authoritative state at
                // receipt; its promise predates this reply, so no old-ballot
                // accepts can slip in afterwards.
                const unsigned from_idx = m.client;
                for (InstanceId i = books_.first_unresolved(); i < books_.size(); ++i)
                    if (auto e = acc_[from_idx].accepted(i)) remember_accepted(*e);
                if (++promises_ >= f_ + 1 && reconfiguring_ == false) become_ready();
                break;
            }
            case MsgKind::kDecision:
                PAXSIM_BUG(idx == 0, "decision notice routed to a non-coordinator");
                books_.mark_decided(m.instance);
                break;
            default:
                PAXSIM_BUG(false, "unexpected message at ring acceptor");
        }
    }

    void learner_msg(const Msg& m) {
        if (m.kind != MsgKind::kRingPass) return;
        if (popcount(m.vote_mask) < f_ + 1) return;  // truncated stale pass
        deliver_.decide(m.instance, m.value);
        ctx_.metrics.on_first_quorum(first_voters(m.vote_mask), false, ctx_.q.now());
        for (const auto& [inst, val] : deliver_.pull()) {
            ctx_.metrics.on_decision(inst, val, store_.at(val).payload_bytes, ctx_.q.now());
            ctx_.metrics.on_delivered(learner_, inst);
            Msg exec;
            exec.kind = MsgKind::kDecision;
            exec.size = wire_size(store_.at(val).payload_bytes);
            exec.instance = inst;
            exec.value = val;
            ctx_.net.schedule_exec(learner_, exec);
        }
        Msg notice = ctl(MsgKind::kDecision, acceptors_[0], m.instance, m.ballot);
        ctx_.net.send(learner_, notice);
    }

    // The first f+1 voters in ring order form the decision quorum.
    std::uint8_t first_voters(std::uint8_t votes) const {
        std::uint8_t out = 0;
        unsigned taken = 0;
        for (NodeId n : ring_) {
            if (n == learner_ || n == front_) continue;
            const unsigned idx = acc_index(n);
            if (votes & (1u << idx)) {
                out |= static_cast<std::uint8_t>(1u << idx);
                if (++taken == f_ + 1) break;
            }
        }
        return out;
    }

    void maintenance() {
        if (!ready_ || reconfiguring_) return;
        const SimTime now = ctx_.q.now();
        const NodeId succ = ring_succ(acceptors_[0]);
        books_.for_each_undecided([&](InstanceId i, LeaderBooks::Book& b) {
            if (now < b.next_retx) return;
            const BufferStat occ = ctx_.net.occupancy(acceptors_[0], succ);
            if (occ.kernel_bytes + occ.app_bytes <= kDupSuppressBytes)
                start_pass(i, b.value);
            b.rto = std::min(b.rto * 2, kRetxCap);
            b.next_retx = now + b.rto;
        });
    }

    NodeId front_ = kNoNode, learner_ = kNoNode;
    std::vector<NodeId> acceptors_;
    std::vector<NodeId> ring_;
    std::unique_ptr<ProxyBank> proxies_;

    Ballot ballot_;
    bool ready_ = false;
    bool reconfiguring_ = false;
    unsigned promises_ = 0;
    std::deque<ValueId> client_q_;
    InstanceId next_instance_ = 0;
    LeaderBooks books_;
    std::vector<Acceptor> acc_;
    InOrderDeliverer deliver_;
    std::unordered_map<InstanceId, AcceptedEntry> p1_high_;
};

}  // namespace paxsim
