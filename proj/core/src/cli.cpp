#include "dlma/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlma/csv.hpp"
#include "dlma/metrics.hpp"
#include "dlma/oracle.hpp"
#include "dlma/runner.hpp"
#include "dlma/svg.hpp"
#include "dlma/sweep.hpp"

namespace dlma::harness {

namespace {

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                           KvMap* kv_out = nullptr) {
    KvMap kv = parse_kv_file(path);
    for (const std::string& assignment : overrides) apply_override(kv, assignment);
    if (kv_out) *kv_out = kv;
    return config_from_kv(kv);
}

oracle::BenchmarkResult benchmark_for(const ScenarioConfig& cfg) {
    return cfg.mode == AgentMode::dqn_fair
               ? oracle::optimal_alpha_fair(cfg, cfg.alpha, cfg.k)
               : oracle::optimal_sum(cfg);
}

std::string node_label(const ScenarioConfig& cfg, int node_id) {
    if (node_id < 0) return "channel";
    const int legacy = static_cast<int>(cfg.nodes.size());
    if (node_id < legacy)
        return "node " + std::to_string(node_id) + " (" +
               env::to_string(cfg.nodes[static_cast<std::size_t>(node_id)].kind) + ")";
    return cfg.physical_agents() > 1 ? "agent " + std::to_string(node_id - legacy) : "agent";
}

int do_run(const std::string& config_path, const std::vector<std::string>& overrides,
           const std::string& out_path) {
    const ScenarioConfig cfg = load_config(config_path, overrides);
    const MetricsRecord rec = run(cfg);
    write_run_csv(std::filesystem::path(out_path), rec, cfg.window);

    for (int n = 0; n < rec.node_count(); ++n) {
        const auto& row = rec.success[static_cast<std::size_t>(n)];
        const double cum = cumulative_throughput(row, rec.slots).value_or(0.0);
        std::cout << node_label(cfg, n) << ": cumulative throughput "
                  << std::fixed << std::setprecision(6) << cum << '\n';
    }
    const double channel =
        cumulative_throughput(channel_series(rec), rec.slots).value_or(0.0);
    std::cout << "channel: cumulative throughput " << std::fixed << std::setprecision(6)
              << channel << '\n';
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

int do_sweep(const std::string& config_path, const std::vector<std::string>& overrides,
             const std::string& vary, int seeds, int jobs, const std::string& out_path) {
    const std::size_t eq = vary.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= vary.size())
        throw std::invalid_argument("--vary expects key=value1,value2,...");
    SweepSpec spec;
    spec.key = vary.substr(0, eq);
    std::string rest = vary.substr(eq + 1);
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = rest.find(',', start);
        spec.values.push_back(rest.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    spec.seeds = seeds;
    spec.jobs = jobs;

    KvMap kv;
    load_config(config_path, overrides, &kv);  // validates the base config early
    const std::vector<SweepRow> rows = sweep(kv, spec);
    write_sweep_csv(std::filesystem::path(out_path), rows);

    for (const SweepRow& row : rows) {
        if (row.seed != -1 || row.node_id != -1) continue;
        std::cout << spec.key << '=' << row.param << ": mean channel throughput "
                  << std::fixed << std::setprecision(6) << row.achieved << " (benchmark "
                  << row.oracle << ")\n";
    }
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

int do_oracle(const std::string& config_path, const std::vector<std::string>& overrides) {
    const ScenarioConfig cfg = load_config(config_path, overrides);
    const oracle::BenchmarkResult best = benchmark_for(cfg);
    std::cout << "method: " << oracle::to_string(best.method) << '\n';
    std::cout << std::fixed << std::setprecision(6);
    std::cout << "sum throughput: " << best.sum << '\n';
    for (std::size_t i = 0; i + 1 < best.per_node.size(); ++i)
        std::cout << node_label(cfg, static_cast<int>(i)) << ": " << best.per_node[i] << '\n';
    std::cout << "agent (all learner-driven nodes): " << best.per_node.back() << '\n';
    std::cout << "policy: " << best.policy << '\n';
    return 0;
}

std::string sniff_header(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string line;
    std::getline(in, line);
    return line;
}

int do_plot(const std::string& csv_path, std::string out_path) {
    if (out_path.empty())
        out_path = std::filesystem::path(csv_path).replace_extension(".svg").string();
    const std::string header = sniff_header(csv_path);

    if (header.rfind("t,node_id,", 0) == 0) {
        const std::vector<RunCsvRow> rows = read_run_csv(std::filesystem::path(csv_path));
        std::map<int, Series> by_node;
        for (const RunCsvRow& row : rows) {
            Series& s = by_node[row.node_id];
            s.x.push_back(static_cast<double>(row.t));
            s.y.push_back(row.cum_tp);
        }
        std::vector<Series> series;
        for (auto& [node, s] : by_node) {
            s.label = "node " + std::to_string(node);
            // keep the plot light: at most ~2000 points per line
            const std::size_t stride = std::max<std::size_t>(s.x.size() / 2000, 1);
            if (stride > 1) {
                Series thin;
                thin.label = s.label;
                for (std::size_t i = 0; i < s.x.size(); i += stride) {
                    thin.x.push_back(s.x[i]);
                    thin.y.push_back(s.y[i]);
                }
                s = std::move(thin);
            }
            series.push_back(std::move(s));
        }
        write_line_chart(std::filesystem::path(out_path), series, "cumulative throughput per node",
                         "slot", "throughput");
    } else if (header.rfind("param,seed,", 0) == 0) {
        const std::vector<SweepRow> rows = read_sweep_csv(std::filesystem::path(csv_path));
        bool per_node = false;
        for (const SweepRow& row : rows)
            if (row.seed == -1 && row.node_id >= 0) per_node = true;
        std::vector<BarGroup> groups;
        for (const SweepRow& row : rows) {
            if (row.seed != -1) continue;
            if (per_node && row.node_id < 0) continue;
            BarGroup g;
            g.category = per_node ? row.param + "/n" + std::to_string(row.node_id) : row.param;
            g.achieved = row.achieved;
            g.oracle = row.oracle;
            groups.push_back(std::move(g));
        }
        write_bar_chart(std::filesystem::path(out_path), groups,
                        "achieved vs benchmark throughput", "throughput");
    } else {
        throw std::runtime_error("unrecognized csv header in " + csv_path);
    }
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"slotted-channel multiple-access learning testbed"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    std::string vary;
    int seeds = 10;
    int jobs = 1;

    CLI::App* cmd_run = app.add_subcommand("run", "execute one seeded run and write its table");
    cmd_run->add_option("config", config_path, "scenario config file")->required();
    cmd_run->add_option("--set", overrides, "override a config key (key=value)");
    cmd_run->add_option("--out", out_path, "output csv path")->default_val("run.csv");

    CLI::App* cmd_sweep =
        app.add_subcommand("sweep", "vary one key over several values and seeds");
    cmd_sweep->add_option("config", config_path, "scenario config file")->required();
    cmd_sweep->add_option("--vary", vary, "key=value1,value2,...")->required();
    cmd_sweep->add_option("--seeds", seeds, "seeds per value")->default_val(10);
    cmd_sweep->add_option("--jobs", jobs, "worker threads")->default_val(1);
    cmd_sweep->add_option("--set", overrides, "override a config key (key=value)");
    cmd_sweep->add_option("--out", out_path, "output csv path")->default_val("sweep.csv");

    CLI::App* cmd_oracle =
        app.add_subcommand("oracle", "print the model-aware benchmark for a scenario");
    cmd_oracle->add_option("config", config_path, "scenario config file")->required();
    cmd_oracle->add_option("--set", overrides, "override a config key (key=value)");

    CLI::App* cmd_plot = app.add_subcommand("plot", "render a csv table to svg");
    cmd_plot->add_option("csv", config_path, "run or sweep csv")->required();
    cmd_plot->add_option("--out", out_path, "output svg path")->default_val("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_run->parsed()) return do_run(config_path, overrides, out_path);
        if (cmd_sweep->parsed())
            return do_sweep(config_path, overrides, vary, seeds, jobs, out_path);
        if (cmd_oracle->parsed()) return do_oracle(config_path, overrides);
        if (cmd_plot->parsed()) return do_plot(config_path, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace dlma::harness
