#pragma once

#include <deque>
#include <optional>

#include "paxsim/arch.hpp"
#include "paxsim/steering.hpp"

namespace paxsim {

// Fixed-leader multi-Paxos over app-buffered sockets. One proposer, three
// acceptors, one learner. 2A and 2B carry the full value; every acceptor
// acks to both the proposer (decision bookkeeping) and the learner
// (delivery), which is what doubles a slow acceptor's egress demand.
// The proposer additionally pays serialization work for each 2A fan-out
// (see send_2a); with receive costs alone the leader would speed up
// whenever a lagging acceptor's acks thin out, which is backwards.
// The steering flag turns on quorum steering at the proposer.
class LibpaxosArch : public Arch {
public:
    LibpaxosArch(Ctx ctx, bool steering) : Arch(ctx), steering_(steering) {}

    void build(const Scenario& sc) override {
        auto cls = [&](int acc_idx) {
            if (sc.layout == 'b' && acc_idx == 2) return InstanceClass::kMicro;
            return InstanceClass::kSmall;
        };
        auto region = [&](int acc_idx) -> std::string {
            if (sc.layout != 'd') return "uswest2b";
            if (acc_idx == 1) return "uswest2c";
            if (acc_idx == 2) return "useast1b";
            return "uswest2b";
        };
        NodeSpec p;
        p.name = "proposer";
        p.cls = sc.layout == 'c' ? InstanceClass::kLarge : InstanceClass::kSmall;
        p.roles = static_cast<std::uint8_t>(Role::kProposer);
        p.region = "uswest2b";
        proposer_ = ctx_.net.add_node(p);
        for (int i = 0; i < 3; ++i) {
            NodeSpec a;
            a.name = "acceptor" + std::to_string(i);
            a.cls = cls(i);
            a.roles = static_cast<std::uint8_t>(Role::kAcceptor);
            a.region = region(i);
            acceptors_.push_back(ctx_.net.add_node(a));
        }
        NodeSpec l;
        l.name = "learner";
        l.cls = InstanceClass::kSmall;
        l.roles = static_cast<std::uint8_t>(Role::kLearner);
        l.region = "uswest2b";
        learner_ = ctx_.net.add_node(l);

        for (NodeId a : acceptors_) {
            ctx_.net.connect(proposer_, a, Discipline::kNonblockAppbuf);
            ctx_.net.connect(a, learner_, Discipline::kNonblockAppbuf);
        }
        ballot_ = Ballot{1, proposer_};
        acc_.resize(3);
        ptracker_.emplace(f_);
        ltracker_.emplace(f_);
        if (steering_) plan_.emplace(3, f_, 0);
    }

    void start() override {
        ctx_.q.schedule(kMaintTick, Ev{Ev::K::kMaintenance, proposer_, 0, 0, Msg{}});
        for (NodeId a : acceptors_)
            ctx_.net.send(proposer_, ctl(MsgKind::kPhase1A, a, 0, ballot_));
    }

    NodeId leader() const override { return proposer_; }
    std::vector<NodeId> acceptor_nodes() const override { return acceptors_; }
    std::vector<NodeId> killable() const override { return acceptors_; }

    void client_submit(std::uint16_t client, std::uint32_t seq,
                       std::uint32_t bytes) override {
        Msg m;
        m.kind = MsgKind::kClientRequest;
        m.size = wire_size(bytes);
        m.client = client;
        m.client_seq = seq;
        ctx_.net.inject(proposer_, m, kClientOneWay);
    }

    void on_message(NodeId at, const Msg& m) override {
        if (at == proposer_) {
            proposer_msg(m);
        } else if (at == learner_) {
            learner_msg(m);
        } else {
            acceptor_msg(acc_index(at), m);
        }
    }

    void on_executed(NodeId, const Msg& m) override {
        if (m.kind != MsgKind::kDecision) return;  // 2A serialization work
        for (const RequestRef& r : store_.at(m.value).requests)
            ctx_.clients.send_response(r.client, r.seq);
    }

    void on_arch_event(const Ev& ev) override {
        if (ev.k != Ev::K::kMaintenance) return;
        maintenance();
        ctx_.q.schedule(ctx_.q.now() + kMaintTick,
                        Ev{Ev::K::kMaintenance, proposer_, 0, 0, Msg{}});
    }

    const SteeringPlan* plan() const { return plan_ ? &*plan_ : nullptr; }

private:
    static constexpr unsigned f_ = 1;

    unsigned acc_index(NodeId n) const {
        for (unsigned i = 0; i < acceptors_.size(); ++i)
            if (acceptors_[i] == n) return i;
        PAXSIM_BUG(false, "message at unknown acceptor");
        return 0;
    }

    std::uint8_t all_mask() const { return 0x7; }

    // -- proposer ----------------------------------------------------------

    void proposer_msg(const Msg& m) {
        switch (m.kind) {
            case MsgKind::kClientRequest:
                if (!ready_) pre_ready_.push_back(m);
                else propose(m);
                break;
            case MsgKind::kPhase1B:
                if (m.batch == 1 && m.ballot == ballot_ && !ready_) {
                    if (++promises_ >= f_ + 1) {
                        ready_ = true;
                        while (!pre_ready_.empty()) {
                            propose(pre_ready_.front());
                            pre_ready_.pop_front();
                        }
                    }
                }
                break;
            case MsgKind::kPhase2B:
                proposer_2b(m);
                break;
            default:
                PAXSIM_BUG(false, "unexpected message at proposer");
        }
    }

    void propose(const Msg& req) {
        const std::uint32_t bytes = req.size - kHeaderBytes;
        const ValueId v = store_.intern({bytes, {{req.client, req.client_seq}}});
        const InstanceId i = next_instance_++;
        std::uint8_t targets = all_mask();
        std::uint32_t step = 0;
        bool probe = false;
        if (plan_) {
            const SteeringPlan::Alloc a = plan_->allocate();
            targets = a.targets;
            step = a.step;
            probe = a.probe;
        }
        LeaderBooks::Book& b = books_.open(i, v, targets, ctx_.q.now());
        b.step = step;
        b.probe = probe;
        ptracker_->open(i, ballot_, v);
        send_2a(i, b);
    }

    void send_2a(InstanceId i, const LeaderBooks::Book& b) {
        const std::uint32_t payload = store_.at(b.value).payload_bytes;
        std::uint32_t sent = 0;
        for (unsigned idx = 0; idx < acceptors_.size(); ++idx) {
            if (!(b.targets & (1u << idx))) continue;
            if (!ctx_.net.alive(acceptors_[idx])) continue;
            ctx_.net.send(proposer_, val_msg(MsgKind::kPhase2A, acceptors_[idx], i,
                                             ballot_, b.value, payload));
            ++sent;
        }
        if (sent == 0) return;
        // Serializing the value and pushing one copy per follower socket
        // costs the leader CPU; charge it at half the receive path's byte
        // rate. Keeps the leader the bottleneck regardless of how fast the
        // acceptors ack back.
        Msg work;
        work.kind = MsgKind::kPhase2A;
        work.size = sent * wire_size(payload) / 2;
        work.instance = i;
        ctx_.net.schedule_exec(proposer_, work);
    }

    void proposer_2b(const Msg& m) {
        const unsigned idx = acc_index(m.from);
        if (plan_) plan_->on_phase2b(idx, ctx_.q.now());
        if (m.batch == 0) return;  // reject of a stale ballot; absorbed
        const AckOutcome out = ptracker_->on_phase2b(m.instance, idx, m.ballot, m.value);
        if (out != AckOutcome::kDecided) return;
        books_.mark_decided(m.instance);
        const LeaderBooks::Book& b = books_.at(m.instance);
        const std::uint8_t fq = ptracker_->at(m.instance).first_quorum;
        ctx_.metrics.on_first_quorum(fq, steering_ && !b.probe, ctx_.q.now());
        if (plan_) plan_->on_first_quorum(b.step, b.probe, fq);
    }

    void maintenance() {
        if (!ready_) return;
        const SimTime now = ctx_.q.now();
        if (plan_) {
            const std::uint8_t pending = books_.pending_target_mask();
            if (plan_->check_suspicion(now, pending)) {
                // Fresh step: re-open the undecided window toward everyone so
                // the decisions stuck on the suspected member can complete.
                books_.for_each_undecided([&](InstanceId i, LeaderBooks::Book& b) {
                    b.targets = all_mask();
                    b.step = plan_->step();
                    b.probe = true;
                    b.rto = kRetxInitial;
                    b.next_retx = now + b.rto;
                    send_2a(i, b);
                });
                return;
            }
        }
        books_.for_each_undecided([&](InstanceId i, LeaderBooks::Book& b) {
            if (now < b.next_retx) return;
            send_2a(i, b);
            b.rto = std::min(b.rto * 2, kRetxCap);
            b.next_retx = now + b.rto;
        });
    }

    // -- acceptor ------------------------------------------------------------

    void acceptor_msg(unsigned idx, const Msg& m) {
        const NodeId self = acceptors_[idx];
        switch (m.kind) {
            case MsgKind::kPhase1A: {
                const Phase1BMsg r = acc_[idx].on_phase1a(m.ballot, 0, kPhase1Window);
                Msg reply = ctl(MsgKind::kPhase1B, proposer_, 0, r.ballot);
                reply.batch = r.promised ? 1 : 0;
                reply.size += static_cast<std::uint32_t>(16 * r.accepted.size());
                ctx_.net.send(self, reply);
                break;
            }
            case MsgKind::kPhase2A: {
                const auto prior = acc_[idx].accepted(m.instance);
                const bool dup = prior && prior->v_rnd == m.ballot && prior->value == m.value;
                if (dup && buffered_out(self) > kDupSuppressBytes) return;
                const Phase2BMsg r = acc_[idx].on_phase2a(m.ballot, m.instance, m.value);
                if (r.accepted) {
                    const std::uint32_t payload = store_.at(m.value).payload_bytes;
                    ctx_.net.send(self, ack_2b(proposer_, r, payload));
                    ctx_.net.send(self, ack_2b(learner_, r, payload));
                } else {
                    Msg rej = ctl(MsgKind::kPhase2B, proposer_, m.instance, r.ballot);
                    rej.batch = 0;
                    ctx_.net.send(self, rej);
                }
                break;
            }
            default:
                PAXSIM_BUG(false, "unexpected message at acceptor");
        }
    }

    Msg ack_2b(NodeId to, const Phase2BMsg& r, std::uint32_t payload) const {
        Msg m = val_msg(MsgKind::kPhase2B, to, r.instance, r.ballot, r.value, payload);
        m.batch = 1;
        return m;
    }

    std::uint64_t buffered_out(NodeId acceptor) const {
        const BufferStat toward_p = ctx_.net.occupancy(acceptor, proposer_);
        const BufferStat toward_l = ctx_.net.occupancy(acceptor, learner_);
        return toward_p.kernel_bytes + toward_p.app_bytes + toward_l.kernel_bytes +
               toward_l.app_bytes;
    }

    // -- learner --------------------------------------------------------------

    void learner_msg(const Msg& m) {
        if (m.kind != MsgKind::kPhase2B || m.batch == 0) return;
        const AckOutcome out =
            ltracker_->on_phase2b(m.instance, acc_index(m.from), m.ballot, m.value);
        if (out != AckOutcome::kDecided) return;
        deliver_.decide(m.instance, m.value);
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
    }

    bool steering_;
    NodeId proposer_ = kNoNode, learner_ = kNoNode;
    std::vector<NodeId> acceptors_;

    Ballot ballot_;
    bool ready_ = false;
    unsigned promises_ = 0;
    std::deque<Msg> pre_ready_;
    InstanceId next_instance_ = 0;
    LeaderBooks books_;
    std::optional<QuorumTracker> ptracker_, ltracker_;
    std::optional<SteeringPlan> plan_;
    std::vector<Acceptor> acc_;
    InOrderDeliverer deliver_;
};

}  // namespace paxsim
