#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dlma/rng.hpp"

namespace dlma::env {

// What a learning node can do in one slot.
enum class AgentAction : int { transmit = 0, wait = 1 };
inline constexpr int action_count = 2;

// What the channel looked like after the slot, as sensed by every node.
enum class Observation : int { success = 0, collision = 1, idleness = 2 };

enum class Protocol { tdma, q_aloha, fw_aloha, eb_aloha };

// Static description of one non-learning node's MAC protocol.
struct ProtocolSpec {
    Protocol kind = Protocol::q_aloha;

    // TDMA: transmit in slot positions `slots` within each frame of `period`.
    std::vector<int> slots;
    int period = 1;

    // q-ALOHA: transmit with probability q, i.i.d. per slot.
    double q = 0.0;

    // Windowed ALOHA: after a transmission the node draws a fresh counter and
    // waits that many slots before transmitting again. Fixed-window keeps the
    // window at `window`; exponential-backoff doubles it per collision up to
    // stage `max_stage`.
    int window = 1;
    int max_stage = 0;

    static ProtocolSpec make_tdma(std::vector<int> slots, int period);
    static ProtocolSpec make_q_aloha(double q);
    static ProtocolSpec make_fw_aloha(int window);
    static ProtocolSpec make_eb_aloha(int window, int max_stage);

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Mutable per-node simulation state.
struct NodeState {
    ProtocolSpec proto;
    // TDMA: slot position within the current frame.
    // Windowed ALOHA: remaining backoff counter (transmit when it is 0).
    std::int64_t counter = 0;
    // Exponential backoff stage k; window is 2^k * W. Always 0 for others.
    int stage = 0;
};

// Fresh node state; windowed ALOHA draws its first counter from [0, W-1].
NodeState make_node(const ProtocolSpec& proto, Rng& rng);

// Does this node transmit in the given slot? Draws from rng only for q-ALOHA.
bool protocol_decide(const NodeState& node, std::int64_t slot, Rng& rng);

// Advance node state past a slot it took part in. `transmitted`/`collided`
// reflect the arbitration of that slot. Draws from rng only when a windowed
// ALOHA node redraws its counter after transmitting.
void protocol_advance(NodeState& node, bool transmitted, bool collided, Rng& rng);

// Result of arbitrating one slot.
struct SlotOutcome {
    std::vector<std::uint8_t> success;  // one flag per node, 1 = sole transmitter
    Observation z = Observation::idleness;
    int transmit_count = 0;
};

// Resolve simultaneous transmissions: exactly one transmitter succeeds,
// two or more collide, none leaves the channel idle.
SlotOutcome arbitrate(std::span<const std::uint8_t> transmit_flags);

// The shared slotted channel: `legacy_count` protocol-driven nodes followed by
// `agent_count` learner-driven transmitters, in that fixed index order.
class Channel {
public:
    Channel(std::vector<ProtocolSpec> legacy, int agent_count, Rng& rng);

    int legacy_count() const { return static_cast<int>(nodes_.size()); }
    int agent_count() const { return agent_count_; }
    int node_count() const { return legacy_count() + agent_count_; }
    std::int64_t slot() const { return slot_; }

    const NodeState& legacy_state(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }

    // Simulate one slot: legacy nodes decide in index order, the given agent
    // actions are applied, the slot is arbitrated, and every legacy node
    // advances. success[i] doubles as the per-node reward r^(i) in {0,1}.
    SlotOutcome step(std::span<const AgentAction> agent_actions, Rng& rng);

private:
    std::vector<NodeState> nodes_;
    int agent_count_ = 0;
    std::int64_t slot_ = 0;
};

std::string to_string(Protocol p);

}  // namespace dlma::env
