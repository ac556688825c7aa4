#pragma once

#include <deque>
#include <memory>
#include <optional>

#include "paxsim/arch.hpp"

namespace paxsim {

// Leader-replica plus three ordering acceptors over non-blocking sockets
// with timed send retries. Client-side proxies batch requests toward the
// leader; 2A carries the full batch, acks come back as 64-byte references,
// and execution happens on the leader, which answers clients directly.
class OpenReplicaArch : public Arch {
public:
    explicit OpenReplicaArch(Ctx ctx) : Arch(ctx) {}

    void build(const Scenario& sc) override {
        NodeSpec ld;
        ld.name = "leader";
        ld.cls = sc.layout == 'c' ? InstanceClass::kLarge : InstanceClass::kSmall;
        ld.roles = static_cast<std::uint8_t>(Role::kProposer) |
                   static_cast<std::uint8_t>(Role::kLearner);
        ld.region = "uswest2b";
        leader_ = ctx_.net.add_node(ld);
        for (int i = 0; i < 3; ++i) {
            NodeSpec a;
            a.name = "acceptor" + std::to_string(i);
            a.cls = (sc.layout == 'b' && i == 2) ? InstanceClass::kMicro
                                                 : InstanceClass::kSmall;
            a.roles = static_cast<std::uint8_t>(Role::kAcceptor);
            a.region = sc.layout == 'd' && i == 1   ? "uswest2c"
                       : sc.layout == 'd' && i == 2 ? "useast1b"
                                                    : "uswest2b";
            acceptors_.push_back(ctx_.net.add_node(a));
            ctx_.net.connect(leader_, acceptors_.back(), Discipline::kNonblockRetry);
        }
        ballot_ = Ballot{1, leader_};
        acc_.resize(3);
        tracker_.emplace(f_);
        proxies_ = std::make_unique<ProxyBank>(
            ctx_.q, std::max<unsigned>(1, sc.clients / 10), kProxyBatchBytes,
            [this](ValueRec rec) { submit_batch(std::move(rec)); });
    }

    void start() override {
        ctx_.q.schedule(kMaintTick, Ev{Ev::K::kMaintenance, leader_, 0, 0, Msg{}});
        for (NodeId a : acceptors_)
            ctx_.net.send(leader_, ctl(MsgKind::kPhase1A, a, 0, ballot_));
    }

    NodeId leader() const override { return leader_; }
    std::vector<NodeId> acceptor_nodes() const override { return acceptors_; }
    std::vector<NodeId> killable() const override { return acceptors_; }

    void client_submit(std::uint16_t client, std::uint32_t seq,
                       std::uint32_t bytes) override {
        proxies_->add(client, seq, bytes);
    }

    void on_arch_event(const Ev& ev) override {
        switch (ev.k) {
            case Ev::K::kProxyFlush:
                proxies_->on_flush_timer(ev.client);
                break;
            case Ev::K::kMaintenance:
                maintenance();
                ctx_.q.schedule(ctx_.q.now() + kMaintTick,
                                Ev{Ev::K::kMaintenance, leader_, 0, 0, Msg{}});
                break;
            default:
                break;
        }
    }

    void on_message(NodeId at, const Msg& m) override {
        if (at == leader_) leader_msg(m);
        else acceptor_msg(acc_index(at), m);
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

    void submit_batch(ValueRec rec) {
        const std::uint32_t bytes = rec.payload_bytes;
        Msg m;
        m.kind = MsgKind::kClientBatch;
        m.size = wire_size(bytes);
        m.value = store_.intern(std::move(rec));
        ctx_.net.inject(leader_, m, kClientOneWay);
    }

    void leader_msg(const Msg& m) {
        switch (m.kind) {
            case MsgKind::kClientBatch:
                if (!ready_) pre_ready_.push_back(m);
                else propose(m.value);
                break;
            case MsgKind::kPhase1B:
                if (m.batch == 1 && m.ballot == ballot_ && !ready_ &&
                    ++promises_ >= f_ + 1) {
                    ready_ = true;
                    while (!pre_ready_.empty()) {
                        propose(pre_ready_.front().value);
                        pre_ready_.pop_front();
                    }
                }
                break;
            case MsgKind::kPhase2B: {
                if (m.batch == 0) return;
                const AckOutcome out = tracker_->on_phase2b(
                    m.instance, acc_index(m.from), m.ballot, m.value);
                if (out != AckOutcome::kDecided) return;
                books_.mark_decided(m.instance);
                ctx_.metrics.on_first_quorum(tracker_->at(m.instance).first_quorum,
                                             false, ctx_.q.now());
                deliver_.decide(m.instance, m.value);
                for (const auto& [inst, val] : deliver_.pull()) {
                    ctx_.metrics.on_decision(inst, val, store_.at(val).payload_bytes,
                                             ctx_.q.now());
                    ctx_.metrics.on_delivered(leader_, inst);
                    Msg exec;
                    exec.kind = MsgKind::kDecision;
                    exec.size = wire_size(store_.at(val).payload_bytes);
                    exec.instance = inst;
                    exec.value = val;
                    ctx_.net.schedule_exec(leader_, exec);
                }
                break;
            }
            default:
                PAXSIM_BUG(false, "unexpected message at leader");
        }
    }

    void propose(ValueId v) {
        const InstanceId i = next_instance_++;
        books_.open(i, v, 0x7, ctx_.q.now());
        tracker_->open(i, ballot_, v);
        send_2a(i, books_.at(i));
    }

    void send_2a(InstanceId i, const LeaderBooks::Book& b) {
        for (unsigned idx = 0; idx < acceptors_.size(); ++idx) {
            if (!(b.targets & (1u << idx))) continue;
            if (!ctx_.net.alive(acceptors_[idx])) continue;
            ctx_.net.send(leader_, val_msg(MsgKind::kPhase2A, acceptors_[idx], i,
                                           ballot_, b.value,
                                           store_.at(b.value).payload_bytes));
        }
    }

    void maintenance() {
        if (!ready_) return;
        const SimTime now = ctx_.q.now();
        books_.for_each_undecided([&](InstanceId i, LeaderBooks::Book& b) {
            if (now < b.next_retx) return;
            send_2a(i, b);
            b.rto = std::min(b.rto * 2, kRetxCap);
            b.next_retx = now + b.rto;
        });
    }

    void acceptor_msg(unsigned idx, const Msg& m) {
        const NodeId self = acceptors_[idx];
        switch (m.kind) {
            case MsgKind::kPhase1A: {
                const Phase1BMsg r = acc_[idx].on_phase1a(m.ballot, 0, kPhase1Window);
                Msg reply = ctl(MsgKind::kPhase1B, leader_, 0, r.ballot);
                reply.batch = r.promised ? 1 : 0;
                reply.size += static_cast<std::uint32_t>(16 * r.accepted.size());
                ctx_.net.send(self, reply);
                break;
            }
            case MsgKind::kPhase2A: {
                const auto prior = acc_[idx].accepted(m.instance);
                const bool dup = prior && prior->v_rnd == m.ballot && prior->value == m.value;
                const BufferStat occ = ctx_.net.occupancy(self, leader_);
                if (dup && occ.kernel_bytes + occ.app_bytes > kDupSuppressBytes) return;
                const Phase2BMsg r = acc_[idx].on_phase2a(m.ballot, m.instance, m.value);
                Msg reply = ctl(MsgKind::kPhase2B, leader_, m.instance, r.ballot);
                reply.batch = r.accepted ? 1 : 0;
                reply.value = r.value;
                ctx_.net.send(self, reply);
                break;
            }
            default:
                PAXSIM_BUG(false, "unexpected message at acceptor");
        }
    }

    NodeId leader_ = kNoNode;
    std::vector<NodeId> acceptors_;
    std::unique_ptr<ProxyBank> proxies_;

    Ballot ballot_;
    bool ready_ = false;
    unsigned promises_ = 0;
    std::deque<Msg> pre_ready_;
    InstanceId next_instance_ = 0;
    LeaderBooks books_;
    std::optional<QuorumTracker> tracker_;
    std::vector<Acceptor> acc_;
    InOrderDeliverer deliver_;
};

}  // namespace paxsim
