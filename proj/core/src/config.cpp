#include "dlma/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dlma::harness {

void ScenarioConfig::validate() const {
    for (const auto& node : nodes) node.validate();
    if (m < 1 || m > 24)
        throw std::invalid_argument("m must lie in [1, 24] (histories pack into 64-bit keys)");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(eps_initial >= 0.0 && eps_initial <= 1.0))
        throw std::invalid_argument("eps_initial must lie in [0, 1]");
    if (!(eps_decay > 0.0 && eps_decay <= 1.0))
        throw std::invalid_argument("eps_decay must lie in (0, 1]");
    if (!(eps_floor >= 0.0 && eps_floor <= eps_initial))
        throw std::invalid_argument("eps_floor must lie in [0, eps_initial]");
    if (!(rho > 0.0)) throw std::invalid_argument("rho must be > 0");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
    if (f < 1) throw std::invalid_argument("f must be >= 1");
    if (batch < 1) throw std::invalid_argument("batch must be >= 1");
    if (capacity < batch) throw std::invalid_argument("capacity must be >= batch");
    if (hidden_width < 1) throw std::invalid_argument("hidden_width must be >= 1");
    if (arch == nn::Arch::plain) {
        if (hidden_layers < 1) throw std::invalid_argument("hidden_layers must be >= 1");
    } else if (hidden_layers < 2 || hidden_layers % 2 != 0) {
        throw std::invalid_argument("hidden_layers must be even and >= 2 when arch = resnet");
    }
    if (t < 0) throw std::invalid_argument("t must be >= 0");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if ((mode == AgentMode::tabular_rl || mode == AgentMode::dqn_sum) && k != 1)
        throw std::invalid_argument("k must be 1 for mode " + to_string(mode));
}

int ScenarioConfig::transmitter_count() const {
    return mode == AgentMode::multi_independent ? k : 1;
}

int ScenarioConfig::physical_agents() const {
    return mode == AgentMode::dqn_fair || mode == AgentMode::multi_independent ? k : 1;
}

std::string to_string(AgentMode m) {
    switch (m) {
        case AgentMode::tabular_rl: return "tabular_rl";
        case AgentMode::dqn_sum: return "dqn_sum";
        case AgentMode::dqn_fair: return "dqn_fair";
        case AgentMode::multi_independent: return "multi_independent";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::int64_t to_int(const std::string& key, const std::string& val) {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), out);
    if (ec != std::errc{} || ptr != val.data() + val.size())
        throw std::invalid_argument("config key '" + key + "': expected integer, got '" + val + "'");
    return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& val) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), out);
    if (ec != std::errc{} || ptr != val.data() + val.size())
        throw std::invalid_argument("config key '" + key + "': expected unsigned integer, got '" +
                                    val + "'");
    return out;
}

double to_real(const std::string& key, const std::string& val) {
    try {
        std::size_t pos = 0;
        const double out = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return out;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected number, got '" + val + "'");
    }
}

AgentMode mode_from(const std::string& val) {
    if (val == "tabular_rl") return AgentMode::tabular_rl;
    if (val == "dqn_sum") return AgentMode::dqn_sum;
    if (val == "dqn_fair") return AgentMode::dqn_fair;
    if (val == "multi_independent") return AgentMode::multi_independent;
    throw std::invalid_argument("config key 'mode': unknown mode '" + val + "'");
}

nn::Arch arch_from(const std::string& val) {
    if (val == "plain") return nn::Arch::plain;
    if (val == "resnet") return nn::Arch::resnet;
    throw std::invalid_argument("config key 'arch': unknown architecture '" + val + "'");
}

}  // namespace

KvMap parse_kv_text(const std::string& text) {
    KvMap kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string val = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        if (!kv.emplace(key, val).second)
            throw std::invalid_argument("config: duplicate key '" + key + "'");
    }
    return kv;
}

KvMap parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str());
}

void apply_override(KvMap& kv, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("override '" + assignment + "' must look like key=value");
    kv[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::vector<int> parse_slot_set(const std::string& text) {
    std::vector<int> slots;
    std::string token;
    auto flush = [&] {
        const std::string item = trim(token);
        token.clear();
        if (item.empty()) throw std::invalid_argument("slot set: empty entry in '" + text + "'");
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            slots.push_back(static_cast<int>(to_int("slot set", item)));
            return;
        }
        const int lo = static_cast<int>(to_int("slot set", trim(item.substr(0, dash))));
        const int hi = static_cast<int>(to_int("slot set", trim(item.substr(dash + 1))));
        if (hi < lo) throw std::invalid_argument("slot set: range '" + item + "' is reversed");
        for (int s = lo; s <= hi; ++s) slots.push_back(s);
    };
    for (char c : text) {
        if (c == ',' || c == ';') flush();
        else token.push_back(c);
    }
    flush();
    return slots;
}

namespace {

env::ProtocolSpec node_from_group(int index, const std::map<std::string, std::string>& fields) {
    const std::string prefix = "node." + std::to_string(index) + ".";
    auto need = [&](const char* name) {
        const auto it = fields.find(name);
        if (it == fields.end())
            throw std::invalid_argument("config: missing key '" + prefix + name + "'");
        return it->second;
    };
    auto forbid_others = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [name, _] : fields) {
            bool ok = name == "kind";
            for (const char* a : allowed) ok = ok || name == a;
            if (!ok)
                throw std::invalid_argument("config: unknown key '" + prefix + name + "'");
        }
    };
    const std::string kind = need("kind");
    if (kind == "tdma") {
        forbid_others({"x", "y"});
        return env::ProtocolSpec::make_tdma(parse_slot_set(need("x")),
                                            static_cast<int>(to_int(prefix + "y", need("y"))));
    }
    if (kind == "q_aloha") {
        forbid_others({"q"});
        return env::ProtocolSpec::make_q_aloha(to_real(prefix + "q", need("q")));
    }
    if (kind == "fw_aloha") {
        forbid_others({"w"});
        return env::ProtocolSpec::make_fw_aloha(static_cast<int>(to_int(prefix + "w", need("w"))));
    }
    if (kind == "eb_aloha") {
        forbid_others({"w", "m"});
        return env::ProtocolSpec::make_eb_aloha(static_cast<int>(to_int(prefix + "w", need("w"))),
                                                static_cast<int>(to_int(prefix + "m", need("m"))));
    }
    throw std::invalid_argument("config key '" + prefix + "kind': unknown protocol '" + kind + "'");
}

}  // namespace

ScenarioConfig config_from_kv(const KvMap& kv) {
    ScenarioConfig cfg;
    // node.<i>.<field> groups, gathered first.
    std::map<int, std::map<std::string, std::string>> groups;
    for (const auto& [key, val] : kv) {
        if (!key.starts_with("node.")) continue;
        const auto rest = key.substr(5);
        const auto dot = rest.find('.');
        if (dot == std::string::npos)
            throw std::invalid_argument("config: malformed node key '" + key + "'");
        const int index = static_cast<int>(to_int(key, rest.substr(0, dot)));
        if (index < 0) throw std::invalid_argument("config: negative node index in '" + key + "'");
        groups[index][rest.substr(dot + 1)] = val;
    }
    int expected = 0;
    for (const auto& [index, fields] : groups) {
        if (index != expected++)
            throw std::invalid_argument("config: node indices must be contiguous from 0 (missing node." +
                                        std::to_string(expected - 1) + ")");
        cfg.nodes.push_back(node_from_group(index, fields));
    }

    for (const auto& [key, val] : kv) {
        if (key.starts_with("node.")) continue;
        if (key == "mode") cfg.mode = mode_from(val);
        else if (key == "alpha") cfg.alpha = to_real(key, val);
        else if (key == "k") cfg.k = static_cast<int>(to_int(key, val));
        else if (key == "m") cfg.m = static_cast<int>(to_int(key, val));
        else if (key == "gamma") cfg.gamma = to_real(key, val);
        else if (key == "eps_initial") cfg.eps_initial = to_real(key, val);
        else if (key == "eps_decay") cfg.eps_decay = to_real(key, val);
        else if (key == "eps_floor") cfg.eps_floor = to_real(key, val);
        else if (key == "rho") cfg.rho = to_real(key, val);
        else if (key == "beta") cfg.beta = to_real(key, val);
        else if (key == "f") cfg.f = static_cast<int>(to_int(key, val));
        else if (key == "batch") cfg.batch = static_cast<int>(to_int(key, val));
        else if (key == "capacity") cfg.capacity = static_cast<int>(to_int(key, val));
        else if (key == "arch") cfg.arch = arch_from(val);
        else if (key == "hidden_layers") cfg.hidden_layers = static_cast<int>(to_int(key, val));
        else if (key == "hidden_width") cfg.hidden_width = static_cast<int>(to_int(key, val));
        else if (key == "t") cfg.t = to_int(key, val);
        else if (key == "seed") cfg.seed = to_uint(key, val);
        else if (key == "window") cfg.window = static_cast<int>(to_int(key, val));
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

}  // namespace dlma::harness
