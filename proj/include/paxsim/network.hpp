#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "paxsim/errors.hpp"
#include "paxsim/events.hpp"
#include "paxsim/message.hpp"
#include "paxsim/rng.hpp"
#include "paxsim/sim.hpp"
#include "paxsim/time.hpp"
#include "paxsim/topology.hpp"

namespace paxsim {

constexpr std::uint64_t kKernelBufBytes = 16u * 1024 * 1024;
constexpr SimTime kRetryBackoff = kMillisecond;

// What happens when a send does not fit into the channel's kernel buffer.
enum class Discipline : std::uint8_t {
    kBlocking,        // sender's protocol loop stalls until space frees
    kNonblockRetry,   // message queues; sender burns CPU retrying every 1 ms
    kNonblockAppbuf,  // message queues in an unbounded application buffer
};

enum class SendStatus : std::uint8_t {
    kAccepted,
    kSenderBlocked,
    kRetryQueued,
    kAppBuffered,
    kDestDown,
};

struct BufferStat {
    std::uint64_t kernel_bytes = 0;
    std::uint64_t app_bytes = 0;
};

// Scenario-level overrides, registered by name before the nodes exist. A
// class tweak only swaps the class defaults; explicit per-spec rates win.
struct NodeTweak {
    bool has_cls = false;
    InstanceClass cls = InstanceClass::kSmall;
    std::string region;  // empty = keep
};

struct LinkTweak {
    SimTime one_way = -1;             // negative = keep
    std::int64_t bandwidth_bps = -1;  // negative = keep; 0 = uncapped
};

// Receiver-side protocol hooks. Handlers run at CPU-processing completion and
// may call back into Network::send.
class NetListener {
public:
    virtual ~NetListener() = default;
    virtual void on_message(NodeId at, const Msg& m) = 0;
    virtual void on_executed(NodeId at, const Msg& m) {}
};

// Nodes, channels and CPUs. A message costs CPU at the receiver
// (fixed_msg_cost + size/cpu_rate, +/-5% jitter) and occupies the sender's
// kernel buffer from send until that processing completes, which is what
// propagates backpressure from slow receivers. Wire transit serializes through
// the sender NIC (node-wide) and, for bandwidth-constrained channels, the
// node's shared shaped uplink, then waits one-way latency; that is a single
// precomputed arrival event per message.
class Network {
public:
    Network(EventQueue<Ev>& q, std::uint64_t seed) : q_(q), seed_(seed) {}

    void set_listener(NetListener* l) { listener_ = l; }

    void tweak_node(const std::string& name, const NodeTweak& t) { node_tweaks_[name] = t; }
    void tweak_link(const std::string& a, const std::string& b, const LinkTweak& t) {
        link_tweaks_[{a, b}] = t;
    }

    NodeId add_node(const NodeSpec& spec) {
        PAXSIM_BUG(nodes_.size() < 64, "node table full");
        nodes_.push_back(NodeRt{});
        NodeRt& n = nodes_.back();
        n.spec = spec;
        if (auto it = node_tweaks_.find(spec.name); it != node_tweaks_.end()) {
            if (it->second.has_cls) n.spec.cls = it->second.cls;
            if (!it->second.region.empty()) n.spec.region = it->second.region;
        }
        n.jitter = RngStream(seed_, "svc/" + spec.name);
        chan_index_.resize(nodes_.size() * nodes_.size(), -1);
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    void connect(NodeId a, NodeId b, Discipline d) {
        connect_dir(a, b, d, tweaked(default_link(nodes_[a].spec, nodes_[b].spec), a, b));
        connect_dir(b, a, d, tweaked(default_link(nodes_[b].spec, nodes_[a].spec), a, b));
    }

    void connect_dir(NodeId src, NodeId dst, Discipline d, LinkSpec link) {
        rebuild_index_ = true;
        Channel c;
        c.src = src;
        c.dst = dst;
        c.discipline = d;
        c.link = link;
        channels_.push_back(c);
    }

    LinkSpec tweaked(LinkSpec l, NodeId a, NodeId b) const {
        auto it = link_tweaks_.find({nodes_[a].spec.name, nodes_[b].spec.name});
        if (it == link_tweaks_.end())
            it = link_tweaks_.find({nodes_[b].spec.name, nodes_[a].spec.name});
        if (it == link_tweaks_.end()) return l;
        if (it->second.one_way >= 0) l.one_way_latency = it->second.one_way;
        if (it->second.bandwidth_bps >= 0)
            l.bandwidth_bps = static_cast<std::uint64_t>(it->second.bandwidth_bps);
        return l;
    }

    std::size_t node_count() const { return nodes_.size(); }
    const NodeSpec& spec(NodeId n) const { return nodes_[n].spec; }
    bool alive(NodeId n) const { return nodes_[n].alive; }

    NodeId by_name(const std::string& name) const {
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].spec.name == name) return static_cast<NodeId>(i);
        return kNoNode;
    }

    SendStatus send(NodeId src, Msg m) {
        PAXSIM_BUG(m.to != kNoNode && m.size >= kHeaderBytes, "malformed message");
        m.from = src;
        if (!nodes_[src].alive) return SendStatus::kDestDown;
        if (!nodes_[m.to].alive) return SendStatus::kDestDown;
        Channel& ch = channel(src, m.to);
        if (ch.kernel_used + m.size <= kKernelBufBytes) {
            accept_into_channel(ch, m);
            return SendStatus::kAccepted;
        }
        switch (ch.discipline) {
            case Discipline::kBlocking:
                nodes_[src].pending_sends.push_back(m);
                return SendStatus::kSenderBlocked;
            case Discipline::kNonblockRetry:
                ch.retry_q.push_back(m);
                ch.retry_bytes += m.size;
                if (!ch.retry_armed) {
                    ch.retry_armed = true;
                    q_.schedule(q_.now() + kRetryBackoff,
                                Ev{Ev::K::kRetryTick, src, 0, index_of(ch), Msg{}});
                }
                return SendStatus::kRetryQueued;
            case Discipline::kNonblockAppbuf:
                ch.app_q.push_back(m);
                ch.app_bytes += m.size;
                return SendStatus::kAppBuffered;
        }
        return SendStatus::kAccepted;
    }

    // Client-facing ingress: latency-only path into the node's CPU queue, no
    // channel accounting (the closed loop bounds what clients can have in
    // flight). from stays kNoNode.
    void inject(NodeId dst, Msg m, SimTime latency) {
        m.to = dst;
        m.from = kNoNode;
        q_.schedule(q_.now() + latency, Ev{Ev::K::kNetArrival, dst, 0, kNoChannel, m});
    }

    // Charges the node one message-equivalent of CPU for executing a
    // delivered value, then reports via on_executed.
    void schedule_exec(NodeId n, Msg m) {
        enqueue_work(n, Work{Work::T::kExec, m, 0});
    }

    void crash(NodeId n) {
        if (!nodes_[n].alive)
            throw AlreadyDeadError("crash of dead node " + nodes_[n].spec.name);
        NodeRt& node = nodes_[n];
        node.alive = false;
        node.death_time = q_.now();
        node.work.clear();
        node.cpu_busy = false;
        node.pending_sends.clear();
        for (Channel& ch : channels_) {
            if (ch.src == n) clear_channel(ch);
            if (ch.dst == n) {
                clear_channel(ch);
                flush_blocked(ch.src);
            }
        }
    }

    BufferStat occupancy(NodeId n, NodeId peer) const {
        const int idx = find_channel(n, peer);
        if (idx < 0) return {};
        const Channel& ch = channels_[idx];
        return {ch.kernel_used, ch.app_bytes + ch.retry_bytes};
    }

    // Peers this node has an outgoing channel to, in creation order.
    std::vector<NodeId> peers_of(NodeId n) const {
        std::vector<NodeId> out;
        for (const Channel& ch : channels_)
            if (ch.src == n) out.push_back(ch.dst);
        return out;
    }

    bool handles(Ev::K k) const {
        return k == Ev::K::kNetArrival || k == Ev::K::kCpuDone || k == Ev::K::kRetryTick;
    }

    void on_event(const Ev& ev) {
        switch (ev.k) {
            case Ev::K::kNetArrival: on_arrival(ev); break;
            case Ev::K::kCpuDone: on_cpu_done(ev.node); break;
            case Ev::K::kRetryTick: on_retry_tick(ev.aux); break;
            default: PAXSIM_BUG(false, "not a network event");
        }
    }

    // Busy nanoseconds per 1 s window, for utilization metrics.
    const std::vector<SimTime>& busy_windows(NodeId n) const { return nodes_[n].busy; }
    // The share of busy time spent on send retries.
    const std::vector<SimTime>& retry_windows(NodeId n) const { return nodes_[n].retry_busy; }

private:
    static constexpr std::uint32_t kNoChannel = 0xffffffffu;

    struct Work {
        enum class T : std::uint8_t { kMessage, kRetry, kExec };
        T type;
        Msg msg;
        std::uint32_t chan = 0;  // kRetry only
    };

    struct NodeRt {
        NodeSpec spec;
        bool alive = true;
        SimTime death_time = -1;
        std::deque<Work> work;
        bool cpu_busy = false;
        Work current{};
        std::deque<Msg> pending_sends;  // blocking discipline
        SimTime egress_free_at = 0;
        SimTime uplink_free_at = 0;
        RngStream jitter;
        std::vector<SimTime> busy;
        std::vector<SimTime> retry_busy;
    };

    struct Channel {
        NodeId src = kNoNode;
        NodeId dst = kNoNode;
        Discipline discipline = Discipline::kNonblockAppbuf;
        LinkSpec link;
        std::uint64_t kernel_used = 0;
        std::deque<Msg> app_q;
        std::uint64_t app_bytes = 0;
        std::deque<Msg> retry_q;
        std::uint64_t retry_bytes = 0;
        bool retry_armed = false;
    };

    EventQueue<Ev>& q_;
    std::uint64_t seed_;
    NetListener* listener_ = nullptr;
    std::vector<NodeRt> nodes_;
    std::vector<Channel> channels_;
    std::map<std::string, NodeTweak> node_tweaks_;
    std::map<std::pair<std::string, std::string>, LinkTweak> link_tweaks_;
    mutable std::vector<int> chan_index_;
    mutable bool rebuild_index_ = true;

    std::uint32_t index_of(const Channel& ch) const {
        return static_cast<std::uint32_t>(&ch - channels_.data());
    }

    int find_channel(NodeId src, NodeId dst) const {
        if (rebuild_index_) {
            chan_index_.assign(nodes_.size() * nodes_.size(), -1);
            for (std::size_t i = 0; i < channels_.size(); ++i)
                chan_index_[channels_[i].src * nodes_.size() + channels_[i].dst] =
                    static_cast<int>(i);
            rebuild_index_ = false;
        }
        return chan_index_[src * nodes_.size() + dst];
    }

    Channel& channel(NodeId src, NodeId dst) {
        const int idx = find_channel(src, dst);
        PAXSIM_BUG(idx >= 0, "send on unconnected pair");
        return channels_[idx];
    }

    void accept_into_channel(Channel& ch, Msg m) {
        ch.kernel_used += m.size;
        NodeRt& src = nodes_[ch.src];
        const SimTime nic_start = std::max(src.egress_free_at, q_.now());
        SimTime done = nic_start + transfer_ns(m.size, src.spec.net_rate());
        src.egress_free_at = done;
        if (ch.link.bandwidth_bps > 0) {
            // Constrained links share one serializer per source node: all of
            // a node's cross-region traffic rides the same shaped uplink.
            done = std::max(src.uplink_free_at, done) +
                   transfer_ns(m.size, ch.link.bandwidth_bps);
            src.uplink_free_at = done;
        }
        m.tx_start = nic_start;
        q_.schedule(done + ch.link.one_way_latency,
                    Ev{Ev::K::kNetArrival, ch.dst, 0, index_of(ch), m});
    }

    void clear_channel(Channel& ch) {
        ch.kernel_used = 0;
        ch.app_q.clear();
        ch.app_bytes = 0;
        ch.retry_q.clear();
        ch.retry_bytes = 0;
    }

    void on_arrival(const Ev& ev) {
        NodeRt& dst = nodes_[ev.node];
        if (!dst.alive) return;  // inbound to a dead node is dropped
        if (ev.aux != kNoChannel) {
            const Channel& ch = channels_[ev.aux];
            const NodeRt& src = nodes_[ch.src];
            // Outbound buffers are discarded at crash: bytes that had not
            // begun wire serialization die with the sender.
            if (!src.alive && ev.msg.tx_start > src.death_time) return;
        }
        enqueue_work(ev.node, Work{Work::T::kMessage, ev.msg, ev.aux});
    }

    void enqueue_work(NodeId n, Work w) {
        NodeRt& node = nodes_[n];
        if (!node.alive) return;
        node.work.push_back(std::move(w));
        maybe_start(n);
    }

    void maybe_start(NodeId n) {
        NodeRt& node = nodes_[n];
        if (node.cpu_busy || !node.pending_sends.empty() || node.work.empty()) return;
        node.current = node.work.front();
        node.work.pop_front();
        node.cpu_busy = true;
        SimTime cost;
        if (node.current.type == Work::T::kRetry) {
            const Channel& ch = channels_[node.current.chan];
            cost = node.spec.fixed_cost() *
                   static_cast<SimTime>(std::max<std::size_t>(1, ch.retry_q.size()));
            account(n, cost, true);
        } else {
            const SimTime base = node.spec.fixed_cost() +
                                 transfer_ns(node.current.msg.size, node.spec.cpu_rate());
            cost = base * static_cast<SimTime>(950 + node.jitter.next_below(100)) / 1000;
            account(n, cost, false);
        }
        q_.schedule(q_.now() + cost, Ev{Ev::K::kCpuDone, n, 0, 0, Msg{}});
    }

    void on_cpu_done(NodeId n) {
        NodeRt& node = nodes_[n];
        if (!node.alive) return;
        PAXSIM_BUG(node.cpu_busy, "cpu done without work");
        node.cpu_busy = false;
        const Work w = node.current;
        switch (w.type) {
            case Work::T::kMessage: {
                if (w.chan != kNoChannel) free_bytes(channels_[w.chan], w.msg.size);
                if (listener_) listener_->on_message(n, w.msg);
                break;
            }
            case Work::T::kRetry: {
                Channel& ch = channels_[w.chan];
                flush_retry(ch);
                if (!ch.retry_q.empty() && nodes_[ch.dst].alive) {
                    q_.schedule(q_.now() + kRetryBackoff,
                                Ev{Ev::K::kRetryTick, n, 0, w.chan, Msg{}});
                } else {
                    ch.retry_armed = false;
                }
                break;
            }
            case Work::T::kExec: {
                if (listener_) listener_->on_executed(n, w.msg);
                break;
            }
        }
        maybe_start(n);
    }

    void on_retry_tick(std::uint32_t chan) {
        Channel& ch = channels_[chan];
        if (!nodes_[ch.src].alive) return;
        if (ch.retry_q.empty() || !nodes_[ch.dst].alive) {
            ch.retry_armed = false;
            ch.retry_q.clear();
            ch.retry_bytes = 0;
            return;
        }
        enqueue_work(ch.src, Work{Work::T::kRetry, Msg{}, chan});
    }

    void flush_retry(Channel& ch) {
        while (!ch.retry_q.empty() &&
               ch.kernel_used + ch.retry_q.front().size <= kKernelBufBytes) {
            Msg m = ch.retry_q.front();
            ch.retry_q.pop_front();
            ch.retry_bytes -= m.size;
            if (nodes_[ch.dst].alive) accept_into_channel(ch, m);
        }
    }

    void free_bytes(Channel& ch, std::uint32_t size) {
        ch.kernel_used = ch.kernel_used >= size ? ch.kernel_used - size : 0;
        while (!ch.app_q.empty() &&
               ch.kernel_used + ch.app_q.front().size <= kKernelBufBytes) {
            Msg m = ch.app_q.front();
            ch.app_q.pop_front();
            ch.app_bytes -= m.size;
            if (nodes_[ch.dst].alive) accept_into_channel(ch, m);
        }
        flush_blocked(ch.src);
    }

    void flush_blocked(NodeId src) {
        NodeRt& node = nodes_[src];
        if (!node.alive) return;
        bool progressed = false;
        while (!node.pending_sends.empty()) {
            Msg& m = node.pending_sends.front();
            if (!nodes_[m.to].alive) {  // DestDown: the stalled send is dropped
                node.pending_sends.pop_front();
                progressed = true;
                continue;
            }
            Channel& ch = channel(src, m.to);
            if (ch.kernel_used + m.size > kKernelBufBytes) break;
            accept_into_channel(ch, m);
            node.pending_sends.pop_front();
            progressed = true;
        }
        if (progressed && node.pending_sends.empty()) maybe_start(src);
    }

    void account(NodeId n, SimTime dur, bool is_retry) {
        NodeRt& node = nodes_[n];
        SimTime t = q_.now();
        SimTime left = dur;
        while (left > 0) {
            const std::size_t w = static_cast<std::size_t>(t / kSecond);
            if (node.busy.size() <= w) node.busy.resize(w + 1, 0);
            if (node.retry_busy.size() <= w) node.retry_busy.resize(w + 1, 0);
            const SimTime window_end = static_cast<SimTime>(w + 1) * kSecond;
            const SimTime chunk = std::min(left, window_end - t);
            node.busy[w] += chunk;
            if (is_retry) node.retry_busy[w] += chunk;
            t += chunk;
            left -= chunk;
        }
    }
};

}  // namespace paxsim
