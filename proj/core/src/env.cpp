#include "dlma/env.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dlma::env {

ProtocolSpec ProtocolSpec::make_tdma(std::vector<int> slots, int period) {
    ProtocolSpec p;
    p.kind = Protocol::tdma;
    std::sort(slots.begin(), slots.end());
    slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
    p.slots = std::move(slots);
    p.period = period;
    p.validate();
    return p;
}

ProtocolSpec ProtocolSpec::make_q_aloha(double q) {
    ProtocolSpec p;
    p.kind = Protocol::q_aloha;
    p.q = q;
    p.validate();
    return p;
}

ProtocolSpec ProtocolSpec::make_fw_aloha(int window) {
    ProtocolSpec p;
    p.kind = Protocol::fw_aloha;
    p.window = window;
    p.validate();
    return p;
}

ProtocolSpec ProtocolSpec::make_eb_aloha(int window, int max_stage) {
    ProtocolSpec p;
    p.kind = Protocol::eb_aloha;
    p.window = window;
    p.max_stage = max_stage;
    p.validate();
    return p;
}

void ProtocolSpec::validate() const {
    switch (kind) {
        case Protocol::tdma:
            if (period < 1) throw std::invalid_argument("tdma period must be >= 1");
            if (slots.empty()) throw std::invalid_argument("tdma slot set must be nonempty");
            for (int s : slots) {
                if (s < 0 || s >= period)
                    throw std::invalid_argument("tdma slot set entries must lie in [0, period)");
            }
            break;
        case Protocol::q_aloha:
            if (!(q >= 0.0 && q <= 1.0))
                throw std::invalid_argument("q-aloha q must lie in [0, 1]");
            break;
        case Protocol::fw_aloha:
            if (window < 1) throw std::invalid_argument("fw-aloha window must be >= 1");
            break;
        case Protocol::eb_aloha:
            if (window < 1) throw std::invalid_argument("eb-aloha window must be >= 1");
            if (max_stage < 0) throw std::invalid_argument("eb-aloha max_stage must be >= 0");
            if (max_stage > 40)
                throw std::invalid_argument("eb-aloha max_stage must be <= 40 (counter range)");
            break;
    }
}

namespace {

std::int64_t window_at(const ProtocolSpec& p, int stage) {
    return static_cast<std::int64_t>(p.window) << stage;
}

std::int64_t draw_counter(const ProtocolSpec& p, int stage, Rng& rng) {
    return static_cast<std::int64_t>(
        uniform_index(rng, static_cast<std::uint64_t>(window_at(p, stage))));
}

}  // namespace

NodeState make_node(const ProtocolSpec& proto, Rng& rng) {
    proto.validate();
    NodeState n;
    n.proto = proto;
    if (proto.kind == Protocol::fw_aloha || proto.kind == Protocol::eb_aloha)
        n.counter = draw_counter(proto, 0, rng);
    return n;
}

bool protocol_decide(const NodeState& node, std::int64_t slot, Rng& rng) {
    switch (node.proto.kind) {
        case Protocol::tdma: {
            const int pos = static_cast<int>(slot % node.proto.period);
            const auto& xs = node.proto.slots;
            return std::binary_search(xs.begin(), xs.end(), pos);
        }
        case Protocol::q_aloha:
            return bernoulli(rng, node.proto.q);
        case Protocol::fw_aloha:
        case Protocol::eb_aloha:
            return node.counter == 0;
    }
    return false;
}

void protocol_advance(NodeState& node, bool transmitted, bool collided, Rng& rng) {
    switch (node.proto.kind) {
        case Protocol::tdma:
            node.counter = (node.counter + 1) % node.proto.period;
            break;
        case Protocol::q_aloha:
            break;
        case Protocol::fw_aloha:
            if (transmitted)
                node.counter = draw_counter(node.proto, 0, rng);
            else
                node.counter = std::max<std::int64_t>(node.counter - 1, 0);
            break;
        case Protocol::eb_aloha:
            if (transmitted && collided) {
                node.stage = std::min(node.stage + 1, node.proto.max_stage);
                node.counter = draw_counter(node.proto, node.stage, rng);
            } else if (transmitted) {
                node.stage = 0;
                node.counter = draw_counter(node.proto, 0, rng);
            } else {
                node.counter = std::max<std::int64_t>(node.counter - 1, 0);
            }
            break;
    }
}

SlotOutcome arbitrate(std::span<const std::uint8_t> transmit_flags) {
    if (transmit_flags.empty())
        throw std::invalid_argument("arbitrate: node list must be nonempty");
    SlotOutcome out;
    out.transmit_count =
        static_cast<int>(std::count(transmit_flags.begin(), transmit_flags.end(), std::uint8_t{1}));
    out.success.assign(transmit_flags.size(), 0);
    if (out.transmit_count == 0) {
        out.z = Observation::idleness;
    } else if (out.transmit_count == 1) {
        out.z = Observation::success;
        const auto it = std::find(transmit_flags.begin(), transmit_flags.end(), std::uint8_t{1});
        out.success[static_cast<std::size_t>(it - transmit_flags.begin())] = 1;
    } else {
        out.z = Observation::collision;
    }
    return out;
}

Channel::Channel(std::vector<ProtocolSpec> legacy, int agent_count, Rng& rng)
    : agent_count_(agent_count) {
    if (agent_count < 0) throw std::invalid_argument("agent_count must be >= 0");
    nodes_.reserve(legacy.size());
    for (const auto& proto : legacy) nodes_.push_back(make_node(proto, rng));
    if (nodes_.empty() && agent_count_ == 0)
        throw std::invalid_argument("channel needs at least one node");
}

SlotOutcome Channel::step(std::span<const AgentAction> agent_actions, Rng& rng) {
    if (static_cast<int>(agent_actions.size()) != agent_count_)
        throw std::invalid_argument("step: agent_actions size must equal agent_count");

    std::vector<std::uint8_t> flags(static_cast<std::size_t>(node_count()), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        flags[i] = protocol_decide(nodes_[i], slot_, rng) ? 1 : 0;
    for (std::size_t j = 0; j < agent_actions.size(); ++j)
        flags[nodes_.size() + j] = agent_actions[j] == AgentAction::transmit ? 1 : 0;

    SlotOutcome out = arbitrate(flags);
    const bool collided = out.z == Observation::collision;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        protocol_advance(nodes_[i], flags[i] != 0, flags[i] != 0 && collided, rng);
    ++slot_;
    return out;
}

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::tdma: return "tdma";
        case Protocol::q_aloha: return "q_aloha";
        case Protocol::fw_aloha: return "fw_aloha";
        case Protocol::eb_aloha: return "eb_aloha";
    }
    return "?";
}

}  // namespace dlma::env
