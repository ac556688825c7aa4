#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "paxsim/errors.hpp"
#include "paxsim/message.hpp"

namespace paxsim {

// Instances reserved per Phase 1 round; one ranged promise covers this many
// consensus instances so steady state is Phase 2 only.
constexpr InstanceId kPhase1Window = 1u << 20;

struct AcceptedEntry {
    Ballot v_rnd;
    ValueId value = kNoValue;
    InstanceId instance = kNoInstance;
};

struct Phase1BMsg {
    bool promised = false;
    Ballot ballot;              // promised ballot, or the rejecting c_rnd
    InstanceId lo = 0, hi = 0;  // echoed range
    std::vector<AcceptedEntry> accepted;
};

struct Phase2BMsg {
    bool accepted = false;
    Ballot ballot;  // accepted ballot, or the rejecting c_rnd
    InstanceId instance = kNoInstance;
    ValueId value = kNoValue;
};

// Single acceptor: one promised round (ranged promises make it
// instance-independent) plus per-instance accepted state.
class Acceptor {
public:
    // Promise iff ballot >= highest seen; a re-sent 1A at the same ballot is
    // re-promised so retransmission is idempotent.
    Phase1BMsg on_phase1a(Ballot b, InstanceId lo, InstanceId hi) {
        Phase1BMsg r;
        r.lo = lo;
        r.hi = hi;
        if (b < c_rnd_) {
            r.promised = false;
            r.ballot = c_rnd_;
            return r;
        }
        c_rnd_ = b;
        r.promised = true;
        r.ballot = b;
        for (InstanceId i = lo; i < hi && i < accepted_.size(); ++i)
            if (accepted_[i].value != kNoValue)
                r.accepted.push_back({accepted_[i].v_rnd, accepted_[i].value, i});
        return r;
    }

    // Accept iff ballot >= promised round; acceptance raises the promise too.
    Phase2BMsg on_phase2a(Ballot b, InstanceId instance, ValueId value) {
        Phase2BMsg r;
        r.instance = instance;
        if (b < c_rnd_) {
            r.accepted = false;
            r.ballot = c_rnd_;
            return r;
        }
        c_rnd_ = b;
        if (accepted_.size() <= instance) accepted_.resize(instance + 1);
        accepted_[instance].v_rnd = b;
        accepted_[instance].value = value;
        r.accepted = true;
        r.ballot = b;
        r.value = value;
        return r;
    }

    Ballot promised() const { return c_rnd_; }
    std::optional<AcceptedEntry> accepted(InstanceId i) const {
        if (i < accepted_.size() && accepted_[i].value != kNoValue) {
            AcceptedEntry e = accepted_[i];
            e.instance = i;
            return e;
        }
        return std::nullopt;
    }

private:
    Ballot c_rnd_;
    std::vector<AcceptedEntry> accepted_;  // indexed by instance
};

// Value-selection rule: among f+1 promises for one ballot, adopt the value of
// the highest accepted round for the instance, else the proposer's own value.
inline ValueId choose_value(const std::vector<Phase1BMsg>& promises,
                            InstanceId instance, ValueId own, unsigned f) {
    PAXSIM_BUG(promises.size() >= f + 1, "choose_value below quorum");
    for (const auto& p : promises) {
        PAXSIM_BUG(p.promised, "choose_value over a reject");
        PAXSIM_BUG(p.ballot == promises.front().ballot,
                   "choose_value across ballots");
    }
    Ballot best;
    ValueId chosen = own;
    for (const auto& p : promises)
        for (const auto& a : p.accepted)
            if (a.instance == instance && best < a.v_rnd) {
                best = a.v_rnd;
                chosen = a.value;
            }
    return chosen;
}

enum class AckOutcome : std::uint8_t {
    kPending,   // below quorum
    kDecided,   // this ack completed the first quorum
    kAbsorbed,  // duplicate / late / stale-ballot ack
};

// Per-instance Phase 2B bookkeeping for a decision collector. first_quorum is
// frozen at the moment the (f+1)-th matching ack arrives and never changes.
class QuorumTracker {
public:
    explicit QuorumTracker(unsigned f) : f_(f) {}

    struct Slot {
        Ballot ballot;
        ValueId value = kNoValue;
        std::uint8_t acks = 0;          // bitmask by acceptor index
        std::uint8_t first_quorum = 0;  // frozen at decision
        bool open = false;
        bool decided = false;
    };

    void open(InstanceId i, Ballot b, ValueId v) {
        Slot& s = slot(i);
        if (s.decided) return;  // a re-proposal must not reopen a decision
        s.ballot = b;
        s.value = v;
        s.acks = 0;
        s.open = true;
    }

    // Works both for a proposer (slots opened explicitly) and a passive
    // learner (slot adopted from the first ack). A higher ballot restarts
    // the count; a lower one is stale.
    AckOutcome on_phase2b(InstanceId i, unsigned acceptor_idx, Ballot b, ValueId v) {
        Slot& s = slot(i);
        if (s.decided) return AckOutcome::kAbsorbed;
        if (!s.open || s.ballot < b) {
            s.open = true;
            s.ballot = b;
            s.value = v;
            s.acks = 0;
        } else if (b < s.ballot) {
            return AckOutcome::kAbsorbed;
        }
        const std::uint8_t bit = static_cast<std::uint8_t>(1u << acceptor_idx);
        if (s.acks & bit) return AckOutcome::kAbsorbed;
        s.acks |= bit;
        PAXSIM_BUG(v == s.value, "2B value differs from proposal");
        if (popcount(s.acks) >= f_ + 1) {
            s.decided = true;
            s.first_quorum = s.acks;
            return AckOutcome::kDecided;
        }
        return AckOutcome::kPending;
    }

    bool decided(InstanceId i) const {
        return i < slots_.size() && slots_[i].decided;
    }
    const Slot& at(InstanceId i) const { return slots_[i]; }
    bool known(InstanceId i) const { return i < slots_.size(); }

private:
    static unsigned popcount(std::uint8_t m) {
        unsigned c = 0;
        while (m) {
            c += m & 1u;
            m >>= 1;
        }
        return c;
    }

    Slot& slot(InstanceId i) {
        if (slots_.size() <= i) slots_.resize(i + 1);
        return slots_[i];
    }

    unsigned f_;
    std::vector<Slot> slots_;
};

// Gap-free delivery by instance id. decide() records; pull() returns the
// newly deliverable contiguous run.
class InOrderDeliverer {
public:
    void decide(InstanceId i, ValueId v) {
        if (decided_.size() <= i) decided_.resize(i + 1, kNoValue);
        if (decided_[i] == kNoValue) decided_[i] = v;
    }

    std::vector<std::pair<InstanceId, ValueId>> pull() {
        std::vector<std::pair<InstanceId, ValueId>> out;
        while (next_ < decided_.size() && decided_[next_] != kNoValue) {
            out.emplace_back(next_, decided_[next_]);
            ++next_;
        }
        return out;
    }

    InstanceId next_undelivered() const { return next_; }

private:
    std::vector<ValueId> decided_;
    InstanceId next_ = 0;
};

}  // namespace paxsim
