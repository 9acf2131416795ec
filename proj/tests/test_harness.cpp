#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dlma/cli.hpp"
#include "dlma/config.hpp"
#include "dlma/csv.hpp"
#include "dlma/metrics.hpp"
#include "dlma/runner.hpp"
#include "dlma/sweep.hpp"

using namespace dlma;
using namespace dlma::harness;

namespace {

const std::filesystem::path tmp_root = std::filesystem::temp_directory_path() / "dlma-harness-tests";

struct TmpDir {
    TmpDir() {
        std::filesystem::remove_all(tmp_root);
        std::filesystem::create_directories(tmp_root);
    }
    ~TmpDir() { std::filesystem::remove_all(tmp_root); }
} tmp_dir_guard;

ScenarioConfig tiny_tabular(std::int64_t slots) {
    ScenarioConfig cfg;
    cfg.mode = AgentMode::tabular_rl;
    cfg.m = 3;
    cfg.nodes = {env::ProtocolSpec::make_tdma({0}, 2)};
    cfg.t = slots;
    cfg.window = 10;
    cfg.seed = 7;
    return cfg;
}

std::string render_run_csv(const MetricsRecord& m, int window) {
    std::ostringstream out;
    write_run_csv(out, m, window);
    return out.str();
}

}  // namespace

TEST_CASE("the default configuration is the standard hyper-parameter set") {
    const ScenarioConfig cfg;
    CHECK(cfg.mode == AgentMode::dqn_sum);
    CHECK(cfg.alpha == 0.0);
    CHECK(cfg.k == 1);
    CHECK(cfg.m == 20);
    CHECK(cfg.gamma == 0.9);
    CHECK(cfg.eps_initial == 0.1);
    CHECK(cfg.eps_decay == 0.995);
    CHECK(cfg.eps_floor == 0.005);
    CHECK(cfg.rho == 0.01);
    CHECK(cfg.beta == 0.5);
    CHECK(cfg.f == 200);
    CHECK(cfg.batch == 32);
    CHECK(cfg.capacity == 500);
    CHECK(cfg.arch == nn::Arch::resnet);
    CHECK(cfg.hidden_layers == 6);
    CHECK(cfg.hidden_width == 64);
    CHECK(cfg.t == 50000);
    CHECK(cfg.seed == 1);
    CHECK(cfg.window == 1000);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("configuration validation names the offending field") {
    ScenarioConfig cfg;
    cfg.gamma = 1.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("gamma"), std::invalid_argument);

    cfg = ScenarioConfig{};
    cfg.capacity = 16;  // below the batch size
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("capacity"), std::invalid_argument);

    cfg = ScenarioConfig{};
    cfg.hidden_layers = 5;  // resnet depth must be even
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("hidden_layers"), std::invalid_argument);

    cfg = ScenarioConfig{};
    cfg.k = 2;  // only the fused and independent modes drive several nodes
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("k"), std::invalid_argument);

    cfg = ScenarioConfig{};
    cfg.mode = AgentMode::multi_independent;
    cfg.k = 3;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.transmitter_count() == 3);
    CHECK(cfg.physical_agents() == 3);
}

TEST_CASE("key-value text tolerates comments and catches mistakes") {
    const KvMap kv = parse_kv_text("# leading comment\n"
                                   "mode = tabular_rl\n"
                                   "\n"
                                   "  t =  120   # trailing comment\n"
                                   "node.0.kind=q_aloha\n"
                                   "node.0.q = 0.3\n");
    CHECK(kv.at("mode") == "tabular_rl");
    CHECK(kv.at("t") == "120");
    CHECK(kv.at("node.0.q") == "0.3");

    CHECK_THROWS_WITH_AS(parse_kv_text("a = 1\nrubbish line\n"), doctest::Contains("line 2"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_kv_text("a = 1\na = 2\n"), doctest::Contains("duplicate"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_kv_text("= 1\n"), doctest::Contains("empty key"),
                         std::invalid_argument);
}

TEST_CASE("command-line overrides replace single keys") {
    KvMap kv = parse_kv_text("t = 100\nseed = 1\n");
    apply_override(kv, "seed=9");
    apply_override(kv, "window=50");
    CHECK(kv.at("seed") == "9");
    CHECK(kv.at("window") == "50");
    CHECK_THROWS_AS(apply_override(kv, "missing-equals"), std::invalid_argument);
}

TEST_CASE("slot sets accept positions, ranges, and both separators") {
    CHECK(parse_slot_set("0-1") == std::vector<int>{0, 1});
    CHECK(parse_slot_set("1;3") == std::vector<int>{1, 3});
    CHECK(parse_slot_set("2") == std::vector<int>{2});
    CHECK(parse_slot_set("0,2-4") == std::vector<int>{0, 2, 3, 4});
    CHECK_THROWS_WITH_AS(parse_slot_set("5-2"), doctest::Contains("reversed"),
                         std::invalid_argument);
    CHECK_THROWS_AS(parse_slot_set(""), std::invalid_argument);
}

TEST_CASE("a full key-value map builds a validated scenario") {
    const KvMap kv = parse_kv_text("mode = dqn_fair\n"
                                   "alpha = 1\n"
                                   "k = 1\n"
                                   "node.0.kind = tdma\n"
                                   "node.0.x = 0-1\n"
                                   "node.0.y = 10\n"
                                   "node.1.kind = q_aloha\n"
                                   "node.1.q = 0.1\n"
                                   "t = 5000\n"
                                   "seed = 3\n");
    const ScenarioConfig cfg = config_from_kv(kv);
    CHECK(cfg.mode == AgentMode::dqn_fair);
    CHECK(cfg.alpha == 1.0);
    REQUIRE(cfg.nodes.size() == 2);
    CHECK(cfg.nodes[0].kind == env::Protocol::tdma);
    CHECK(cfg.nodes[0].slots == std::vector<int>{0, 1});
    CHECK(cfg.nodes[0].period == 10);
    CHECK(cfg.nodes[1].q == 0.1);
    CHECK(cfg.t == 5000);
    CHECK(cfg.seed == 3);
    CHECK(cfg.m == 20);  // untouched keys keep their defaults
}

TEST_CASE("unknown and malformed keys are rejected by name") {
    CHECK_THROWS_WITH_AS(config_from_kv(parse_kv_text("bogus = 1\n")), doctest::Contains("bogus"),
                         std::invalid_argument);
    // a schedule node must not carry a transmit probability
    CHECK_THROWS_WITH_AS(config_from_kv(parse_kv_text("node.0.kind = tdma\n"
                                                      "node.0.x = 0\n"
                                                      "node.0.y = 5\n"
                                                      "node.0.q = 0.5\n")),
                         doctest::Contains("node.0.q"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(config_from_kv(parse_kv_text("node.0.kind = q_aloha\n")),
                         doctest::Contains("node.0.q"), std::invalid_argument);
    // node indices must be dense
    CHECK_THROWS_WITH_AS(config_from_kv(parse_kv_text("node.1.kind = q_aloha\n"
                                                      "node.1.q = 0.2\n")),
                         doctest::Contains("contiguous"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(config_from_kv(parse_kv_text("t = many\n")), doctest::Contains("t"),
                         std::invalid_argument);
}

TEST_CASE("running zero slots yields an empty record with the right shape") {
    const MetricsRecord m = run(tiny_tabular(0));
    CHECK(m.slots == 0);
    CHECK(m.legacy_count == 1);
    CHECK(m.agent_count == 1);
    REQUIRE(m.success.size() == 2);
    CHECK(m.success[0].empty());
    CHECK(m.success[1].empty());
    REQUIRE(m.distinct.size() == 1);
    CHECK(m.distinct[0].empty());
}

TEST_CASE("a short run records consistent per-slot statistics") {
    const MetricsRecord m = run(tiny_tabular(400));
    REQUIRE(m.slots == 400);
    REQUIRE(m.success.size() == 2);
    CHECK(m.node_learner == std::vector<int>{-1, 0});

    for (std::int64_t t = 0; t < m.slots; ++t) {
        int winners = 0;
        for (const auto& row : m.success) {
            CHECK(row[static_cast<std::size_t>(t)] <= 1);
            winners += row[static_cast<std::size_t>(t)];
        }
        CHECK(winners <= 1);  // at most one packet per slot
    }

    // distinct-state counts start at 1 and never shrink; prior visits of a
    // state are bounded by the slots already played
    const auto& d = m.distinct[0];
    const auto& p = m.prior[0];
    CHECK(d.front() == 1);
    for (std::size_t i = 1; i < d.size(); ++i) {
        CHECK(d[i] >= d[i - 1]);
        CHECK(d[i] <= d[i - 1] + 1);
        CHECK(p[i] <= i);
    }

    // the TDMA node owns every other slot; with the agent learning, the
    // channel should carry clearly more than the schedule alone
    const auto channel = channel_series(m);
    const auto cum = cumulative_throughput(channel, m.slots);
    REQUIRE(cum.has_value());
    CHECK(*cum > 0.5);
}

TEST_CASE("identical configurations replay identical trajectories") {
    const MetricsRecord a = run(tiny_tabular(300));
    const MetricsRecord b = run(tiny_tabular(300));
    CHECK(a.success == b.success);
    CHECK(a.distinct == b.distinct);
    CHECK(a.prior == b.prior);

    ScenarioConfig other = tiny_tabular(300);
    other.seed = 8;
    const MetricsRecord c = run(other);
    CHECK(a.success != c.success);
}

TEST_CASE("throughput summaries window and accumulate rewards") {
    const std::vector<std::uint8_t> rewards = {1, 0, 1, 1};
    CHECK_FALSE(cumulative_throughput(rewards, 0).has_value());
    CHECK(*cumulative_throughput(rewards, 4) == doctest::Approx(0.75));
    CHECK(*cumulative_throughput(rewards, 2) == doctest::Approx(0.5));
    CHECK_FALSE(short_term_throughput(rewards, 1, 2).has_value());  // window not yet full
    CHECK(*short_term_throughput(rewards, 2, 2) == doctest::Approx(0.5));
    CHECK(*short_term_throughput(rewards, 4, 2) == doctest::Approx(1.0));
    CHECK(*short_term_throughput(rewards, 4, 4) == doctest::Approx(0.75));
}

TEST_CASE("the channel series is the per-slot sum of node successes") {
    MetricsRecord m;
    m.slots = 3;
    m.legacy_count = 1;
    m.agent_count = 1;
    m.success = {{1, 0, 0}, {0, 0, 1}};
    m.node_learner = {-1, 0};
    CHECK(channel_series(m) == std::vector<std::uint8_t>{1, 0, 1});
}

TEST_CASE("run tables serialize byte-identically and round-trip") {
    const MetricsRecord m = run(tiny_tabular(60));
    const std::string once = render_run_csv(m, 10);
    const std::string twice = render_run_csv(m, 10);
    CHECK(once == twice);
    CHECK(once.starts_with("t,node_id,reward,short_tp,cum_tp,distinct_states,prior_visits\n"));
    CHECK(once.find("nan") != std::string::npos);  // slots before the window fills

    std::istringstream in(once);
    const std::vector<RunCsvRow> rows = read_run_csv(in);
    REQUIRE(rows.size() == static_cast<std::size_t>(m.slots) * 2);
    CHECK(rows.front().t == 1);
    CHECK(rows.front().node_id == 0);
    CHECK(rows.back().t == 60);
    CHECK(rows.back().node_id == 1);
    for (const auto& row : rows) {
        if (row.node_id == 0) {
            CHECK(row.distinct_states == 0);  // legacy rows carry no state stats
            CHECK(row.prior_visits == 0);
        }
        if (row.t < 10) CHECK(std::isnan(row.short_tp));
    }
    // spot-check one cumulative value against the metrics it came from
    const auto cum = cumulative_throughput(m.success[1], 60);
    const auto& last_agent = rows.back();
    CHECK(last_agent.cum_tp == doctest::Approx(*cum).epsilon(5e-7));
}

TEST_CASE("an empty record writes only the header") {
    const MetricsRecord empty = run(tiny_tabular(0));
    CHECK(render_run_csv(empty, 10) ==
          "t,node_id,reward,short_tp,cum_tp,distinct_states,prior_visits\n");
}

TEST_CASE("malformed run tables are rejected with a line number") {
    std::istringstream bad_header("wrong,header\n");
    CHECK_THROWS_AS(read_run_csv(bad_header), std::runtime_error);
    std::istringstream bad_fields("t,node_id,reward,short_tp,cum_tp,distinct_states,prior_visits\n"
                                  "1,0,1\n");
    CHECK_THROWS_WITH_AS(read_run_csv(bad_fields), doctest::Contains("line 2"),
                         std::runtime_error);
}

TEST_CASE("sweeps compare every seed against the scenario benchmark") {
    const KvMap base = parse_kv_text("mode = tabular_rl\n"
                                     "m = 4\n"
                                     "node.0.kind = q_aloha\n"
                                     "node.0.q = 0.2\n"
                                     "t = 400\n"
                                     "window = 100\n"
                                     "seed = 5\n");
    SweepSpec spec;
    spec.key = "node.0.q";
    spec.values = {"0.2", "0.8"};
    spec.seeds = 3;
    spec.jobs = 2;
    const std::vector<SweepRow> rows = sweep(base, spec);

    // per value: seeds * (2 nodes + channel) + 3 aggregate rows
    REQUIRE(rows.size() == 2 * (3 * 3 + 3));

    for (const std::string& value : spec.values) {
        for (int node = -1; node <= 1; ++node) {
            double mean = 0.0;
            int count = 0;
            double aggregate = -1.0, aggregate_oracle = -1.0;
            for (const auto& row : rows) {
                if (row.param != value || row.node_id != node) continue;
                if (row.seed == -1) {
                    aggregate = row.achieved;
                    aggregate_oracle = row.oracle;
                } else {
                    mean += row.achieved;
                    ++count;
                }
            }
            REQUIRE(count == 3);
            CHECK(aggregate == doctest::Approx(mean / 3).epsilon(1e-12));
            // the benchmark for q and for the channel: max(q, 1-q); the agent
            // side gets the remainder
            const double q = std::stod(value);
            const double best = std::max(q, 1.0 - q);
            if (node == -1) CHECK(aggregate_oracle == doctest::Approx(best));
            if (node == 0) CHECK(aggregate_oracle == doctest::Approx(q > 0.5 ? q : 0.0));
            if (node == 1) CHECK(aggregate_oracle == doctest::Approx(q > 0.5 ? 0.0 : 1.0 - q));
        }
    }

    // per seed, node throughputs add up to the channel row
    for (const auto& row : rows) {
        if (row.seed == -1 || row.node_id != -1) continue;
        double node_sum = 0.0;
        for (const auto& other : rows)
            if (other.param == row.param && other.seed == row.seed && other.node_id >= 0)
                node_sum += other.achieved;
        CHECK(row.achieved == doctest::Approx(node_sum).epsilon(1e-12));
        CHECK(row.achieved <= 1.0 + 1e-9);
    }
}

TEST_CASE("sweep specs are validated") {
    const KvMap base = parse_kv_text("mode = tabular_rl\nt = 50\n");
    SweepSpec spec;  // empty key
    spec.values = {"1"};
    CHECK_THROWS_AS(sweep(base, spec), std::invalid_argument);
    spec.key = "seed";
    spec.values.clear();
    CHECK_THROWS_AS(sweep(base, spec), std::invalid_argument);
    spec.values = {"1"};
    spec.seeds = 0;
    CHECK_THROWS_AS(sweep(base, spec), std::invalid_argument);
}

TEST_CASE("sweep tables round-trip through their CSV form") {
    std::vector<SweepRow> rows = {
        {"0.2", 5, 0, 0.1875, 0.0},
        {"0.2", 5, -1, 0.8125, 0.8},
        {"0.2", -1, 0, 0.1875, 0.0},
    };
    std::ostringstream out;
    write_sweep_csv(out, rows);
    CHECK(out.str().starts_with("param,seed,node_id,achieved_tp,oracle_tp\n"));
    std::istringstream in(out.str());
    const std::vector<SweepRow> back = read_sweep_csv(in);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].param == rows[i].param);
        CHECK(back[i].seed == rows[i].seed);
        CHECK(back[i].node_id == rows[i].node_id);
        CHECK(back[i].achieved == doctest::Approx(rows[i].achieved).epsilon(5e-7));
        CHECK(back[i].oracle == doctest::Approx(rows[i].oracle).epsilon(5e-7));
    }
}

TEST_CASE("the command-line front end wires the pieces together") {
    const std::filesystem::path cfg_path = tmp_root / "smoke.cfg";
    {
        std::ofstream out(cfg_path);
        out << "mode = tabular_rl\nm = 3\nnode.0.kind = tdma\nnode.0.x = 0\nnode.0.y = 2\n"
            << "t = 120\nwindow = 20\nseed = 2\n";
    }
    const std::filesystem::path csv_path = tmp_root / "smoke.csv";
    const std::filesystem::path svg_path = tmp_root / "smoke.svg";

    auto invoke = [](std::vector<std::string> args) {
        std::vector<const char*> argv = {"dlma"};
        for (const auto& a : args) argv.push_back(a.c_str());
        return cli_main(static_cast<int>(argv.size()), argv.data());
    };

    CHECK(invoke({"run", cfg_path.string(), "--out", csv_path.string()}) == 0);
    REQUIRE(std::filesystem::exists(csv_path));
    CHECK(!read_run_csv(csv_path).empty());

    CHECK(invoke({"oracle", cfg_path.string()}) == 0);
    CHECK(invoke({"plot", csv_path.string(), "--out", svg_path.string()}) == 0);
    REQUIRE(std::filesystem::exists(svg_path));
    {
        std::ifstream svg(svg_path);
        std::string first;
        std::getline(svg, first);
        CHECK(first.find("<svg") != std::string::npos);
    }

    // overrides reach the run
    const std::filesystem::path short_csv = tmp_root / "short.csv";
    CHECK(invoke({"run", cfg_path.string(), "--out", short_csv.string(), "--set", "t=40"}) == 0);
    CHECK(read_run_csv(short_csv).size() == 40 * 2);

    // a sweep over two seeds of a tiny scenario
    const std::filesystem::path sweep_csv = tmp_root / "sweep.csv";
    CHECK(invoke({"sweep", cfg_path.string(), "--vary", "node.0.y=2,4", "--seeds", "2", "--out",
                  sweep_csv.string()}) == 0);
    const auto sweep_rows = read_sweep_csv(sweep_csv);
    CHECK(sweep_rows.size() == 2 * (2 * 3 + 3));
    const std::filesystem::path sweep_svg = tmp_root / "sweep.svg";
    CHECK(invoke({"plot", sweep_csv.string(), "--out", sweep_svg.string()}) == 0);
    CHECK(std::filesystem::exists(sweep_svg));

    // failures surface as nonzero exits
    CHECK(invoke({"run", (tmp_root / "missing.cfg").string()}) != 0);
    CHECK(invoke({"frobnicate"}) != 0);
    CHECK(invoke({"run", cfg_path.string(), "--set", "gamma=2"}) != 0);
}
