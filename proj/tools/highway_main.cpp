// highway: train and analyze GCN models with self-training edge addition.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "highway/config.hpp"
#include "highway/dataio.hpp"
#include "highway/errors.hpp"
#include "highway/eval.hpp"
#include "highway/graph.hpp"
#include "highway/highway.hpp"
#include "highway/kernels.hpp"
#include "highway/version.hpp"

namespace {

using highway::HighwayConfig;
using json = nlohmann::json;

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& s, const char* what) {
    std::vector<double> out;
    for (const auto& tok : split_csv(s)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw highway::ConfigError(std::string(what) + ": bad number '" + tok + "'");
        }
    }
    return out;
}

std::vector<std::uint64_t> parse_u64s(const std::string& s, const char* what) {
    std::vector<std::uint64_t> out;
    for (const auto& tok : split_csv(s)) {
        try {
            out.push_back(std::stoull(tok));
        } catch (const std::exception&) {
            throw highway::ConfigError(std::string(what) + ": bad integer '" + tok + "'");
        }
    }
    return out;
}

HighwayConfig resolve_config(const std::string& config_path,
                             const std::vector<std::string>& overrides) {
    HighwayConfig cfg;
    if (!config_path.empty()) cfg = highway::load_config_file(config_path);
    for (const auto& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw highway::ConfigError("--set expects key=value, got '" + kv + "'");
        highway::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

json config_json(const HighwayConfig& cfg) {
    return json{{"lambda", cfg.lambda},
                {"t_n", cfg.t_n},
                {"t_p", cfg.t_p},
                {"epochs", cfg.epochs},
                {"patience", cfg.patience},
                {"max_t", cfg.max_t},
                {"lr", cfg.lr},
                {"dropout", cfg.dropout},
                {"hidden", cfg.hidden},
                {"weight_decay", cfg.weight_decay},
                {"pos_weight", cfg.pos_weight == 0.0 ? json("auto") : json(cfg.pos_weight)},
                {"quota_per_class", cfg.quota_per_class},
                {"mask_policy", highway::mask_policy_name(cfg.mask_policy)},
                {"literal_algorithm", cfg.literal_algorithm},
                {"proposal_cap", cfg.proposal_cap},
                {"continue_training", cfg.continue_training},
                {"normalize_features", cfg.normalize_features},
                {"pair_strategy", highway::pair_strategy_name(cfg.pair_strategy)},
                {"pair_count", cfg.pair_count},
                {"split_seed", cfg.split_seed},
                {"init_seed", cfg.init_seed}};
}

json dataset_json(const highway::Dataset& ds) {
    return json{{"nodes", ds.num_nodes()},
                {"undirected_edges", ds.graph.undirected_edge_count()},
                {"classes", ds.num_classes()},
                {"feature_dim", ds.feature_dim()}};
}

json iterations_json(const highway::HighwayResult& r) {
    json arr = json::array();
    for (const auto& it : r.iterations) {
        json j{{"iteration", it.iteration},
               {"valid_acc", it.valid_acc},
               {"test_acc", it.test_acc},
               {"edges_added", it.edges_added},
               {"epochs_run", it.epochs_run},
               {"best_epoch", it.best_epoch}};
        j["edge_precision"] = it.edge_precision < 0 ? json() : json(it.edge_precision);
        arr.push_back(j);
    }
    return arr;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw highway::InputError("cannot write " + path);
    f << j.dump(2) << '\n';
}

std::string data_dir_or_env(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("HIGHWAY_DATA_DIR"); env && *env) return env;
    throw highway::InputError("no dataset directory: pass --data or set HIGHWAY_DATA_DIR");
}

highway::DataSplit make_split(const highway::Dataset& ds, const HighwayConfig& cfg,
                              const std::string& kind, const std::string& split_file) {
    if (kind == "random") return highway::random_split(ds, cfg.split_seed, cfg.quota_per_class);
    if (kind == "standard") {
        if (split_file.empty())
            throw highway::ConfigError("--split standard requires --split-file");
        return highway::standard_split(ds, split_file);
    }
    throw highway::ConfigError("unknown split kind '" + kind + "'");
}

int cmd_convert(const std::string& content, const std::string& cites, const std::string& out) {
    auto stats = highway::convert_citation_files(content, cites, out);
    std::cout << "wrote " << stats.nodes << " nodes, " << stats.edges
              << " undirected edges to " << out << "\n";
    if (stats.dangling_dropped > 0)
        std::cout << "warning: dropped " << stats.dangling_dropped
                  << " cite(s) referencing unknown ids\n";
    if (stats.duplicate_dropped > 0)
        std::cout << "note: dropped " << stats.duplicate_dropped << " duplicate/self cite(s)\n";
    return 0;
}

int cmd_train(const std::string& data_dir, const HighwayConfig& cfg, const std::string& mode_name,
              const std::string& split_kind, const std::string& split_file,
              const std::string& report_path) {
    const auto mode = highway::parse_train_mode(mode_name);
    const auto t0 = std::chrono::steady_clock::now();

    auto ds = highway::load_canonical(data_dir, cfg.normalize_features);
    auto split = make_split(ds, cfg, split_kind, split_file);
    auto result = highway::highway_train(ds, split, cfg, mode);

    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();

    for (const auto& it : result.iterations) {
        std::cout << "iter " << it.iteration << ": valid=" << it.valid_acc
                  << " test=" << it.test_acc << " edges+=" << it.edges_added;
        if (it.edge_precision >= 0) std::cout << " precision=" << it.edge_precision;
        std::cout << " epochs=" << it.epochs_run << "\n";
    }
    std::cout << "final: test_acc=" << result.final_test_acc
              << " valid_acc=" << result.final_valid_acc
              << " best_iteration=" << result.best_iteration
              << " edges_added=" << result.total_edges_added << " (" << ms << " ms)\n";

    if (!report_path.empty()) {
        json report{{"schema_version", highway::kReportSchemaVersion},
                    {"version", highway::kVersion},
                    {"mode", train_mode_name(mode)},
                    {"config", config_json(cfg)},
                    {"dataset", dataset_json(ds)},
                    {"split",
                     {{"kind", split_kind},
                      {"seed", cfg.split_seed},
                      {"train", split.train.size()},
                      {"valid", split.valid.size()},
                      {"test", split.test.size()}}},
                    {"threads", highway::kernels::max_threads()},
                    {"deterministic_kernels", true},
                    {"iterations", iterations_json(result)},
                    {"final",
                     {{"test_acc", result.final_test_acc},
                      {"valid_acc", result.final_valid_acc},
                      {"best_iteration", result.best_iteration},
                      {"total_edges_added", result.total_edges_added}}},
                    {"duration_ms", ms}};
        write_json(report, report_path);
    }
    return 0;
}

json buckets_json(const highway::HopBucketResult& res) {
    json arr = json::array();
    for (const auto& b : res.buckets) {
        arr.push_back(json{{"hops", b.unreachable ? json("unreachable")
                                                  : b.hops >= 6 ? json("6+") : json(b.hops)},
                           {"count", b.count},
                           {"correct", b.correct},
                           {"accuracy", b.acc}});
    }
    return arr;
}

json sweep_json(const highway::SweepResult& sweep) {
    json pts = json::array();
    for (const auto& p : sweep.points) {
        json runs = json::array();
        for (const auto& r : p.runs)
            runs.push_back(json{{"split_seed", r.split_seed},
                                {"init_seed", r.init_seed},
                                {"test_acc", r.test_acc}});
        pts.push_back(json{{"point", p.label},
                           {"mean", p.mean},
                           {"stddev", p.stddev},
                           {"runs", runs}});
    }
    return pts;
}

int cmd_analyze(const std::string& data_dir, const HighwayConfig& base, const std::string& what,
                const std::string& mode_name, const std::string& lambdas_s,
                const std::string& quotas_s, const std::string& strategies_s,
                const std::string& counts_s, const std::string& split_seeds_s,
                const std::string& init_seeds_s, int jobs, const std::string& out_path) {
    const auto mode = highway::parse_train_mode(mode_name);
    auto ds = highway::load_canonical(data_dir, base.normalize_features);
    const auto split_seeds = parse_u64s(split_seeds_s, "--split-seeds");
    const auto init_seeds = parse_u64s(init_seeds_s, "--init-seeds");

    json out{{"schema_version", highway::kReportSchemaVersion},
             {"version", highway::kVersion},
             {"what", what},
             {"mode", train_mode_name(mode)},
             {"config", config_json(base)},
             {"dataset", dataset_json(ds)}};

    if (what == "hops") {
        json runs = json::array();
        std::map<std::string, std::pair<int, double>> agg;  // bucket -> (runs, acc sum)
        for (auto ss : split_seeds) {
            for (auto is : init_seeds) {
                HighwayConfig cfg = base;
                cfg.split_seed = ss;
                cfg.init_seed = is;
                auto split = highway::random_split(ds, ss, cfg.quota_per_class);
                auto result = highway::highway_train(ds, split, cfg, mode);
                // buckets are always relative to the original topology
                auto hops = highway::hop_distances(ds.graph, split.train, ds.labels);
                auto buckets = highway::hop_bucket_accuracy(result.final_output, ds.labels,
                                                            split.test, hops.dist);
                runs.push_back(json{{"split_seed", ss},
                                    {"init_seed", is},
                                    {"test_acc", result.final_test_acc},
                                    {"buckets", buckets_json(buckets)}});
                for (const auto& b : buckets.buckets) {
                    std::string key = b.unreachable ? "unreachable"
                                      : b.hops >= 6 ? "6+" : std::to_string(b.hops);
                    agg[key].first += 1;
                    agg[key].second += b.acc;
                }
            }
        }
        json mean = json::object();
        for (const auto& [k, v] : agg) mean[k] = v.second / v.first;
        out["runs"] = runs;
        out["mean_bucket_accuracy"] = mean;
    } else if (what == "lambda-sweep") {
        std::vector<highway::GridPoint> grid;
        for (double l : parse_doubles(lambdas_s, "--lambdas"))
            grid.push_back({"lambda=" + std::to_string(l),
                            [l](HighwayConfig& c) { c.lambda = l; }});
        out["sweep"] = sweep_json(highway::run_matrix(ds, base, split_seeds, init_seeds, grid,
                                                      mode, jobs));
    } else if (what == "size-sweep") {
        std::vector<highway::GridPoint> grid;
        for (double q : parse_doubles(quotas_s, "--quotas")) {
            for (double l : parse_doubles(lambdas_s, "--lambdas")) {
                const int qi = static_cast<int>(q);
                grid.push_back({"quota=" + std::to_string(qi) + ",lambda=" + std::to_string(l),
                                [qi, l](HighwayConfig& c) {
                                    c.quota_per_class = qi;
                                    c.lambda = l;
                                }});
            }
        }
        out["sweep"] = sweep_json(highway::run_matrix(ds, base, split_seeds, init_seeds, grid,
                                                      mode, jobs));
    } else if (what == "sampling-sweep") {
        std::vector<highway::GridPoint> grid;
        for (const auto& name : split_csv(strategies_s)) {
            const auto strat = highway::parse_pair_strategy(name);
            for (double cnt : parse_doubles(counts_s, "--counts")) {
                const long long c = static_cast<long long>(cnt);
                grid.push_back({"strategy=" + name + ",count=" + std::to_string(c),
                                [strat, c](HighwayConfig& cf) {
                                    cf.pair_strategy = strat;
                                    cf.pair_count = c;
                                }});
            }
        }
        out["sweep"] = sweep_json(highway::run_matrix(ds, base, split_seeds, init_seeds, grid,
                                                      mode, jobs));
    } else if (what == "embeddings") {
        if (out_path.empty()) throw highway::ConfigError("embeddings analysis requires --out");
        HighwayConfig cfg = base;
        auto split = highway::random_split(ds, cfg.split_seed, cfg.quota_per_class);
        auto result = highway::highway_train(ds, split, cfg, mode);
        highway::export_embeddings(result.final_output, ds.labels, out_path);
        std::cout << "wrote " << ds.num_nodes() << " embedding rows to " << out_path << "\n";
        return 0;
    } else {
        throw highway::ConfigError("unknown analysis '" + what + "'");
    }

    if (!out_path.empty()) {
        write_json(out, out_path);
        std::cout << "wrote " << what << " report to " << out_path << "\n";
    } else {
        std::cout << out.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HighwayGraph: GCN training with node-pair co-training and self-training "
                 "edge addition"};
    app.set_version_flag("--version", std::string("highway ") + highway::kVersion);
    app.require_subcommand(1);

    // convert
    auto* convert = app.add_subcommand("convert", "convert raw citation files to canonical TSV");
    std::string content, cites, out_dir;
    convert->add_option("--content", content, "content file: <id> <features...> <label>")
        ->required();
    convert->add_option("--cites", cites, "cites file: <id> <id>")->required();
    convert->add_option("--out", out_dir, "output dataset directory")->required();

    // train
    auto* train = app.add_subcommand("train", "run one training experiment");
    std::string data_dir, config_path, mode_name = "highway", split_kind = "random";
    std::string split_file, report_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> split_seed, init_seed;
    int threads = 0;
    train->add_option("--data", data_dir, "dataset directory (default: $HIGHWAY_DATA_DIR)");
    train->add_option("--config", config_path, "config file (flat key = value)");
    train->add_option("--mode", mode_name, "typical|highway|no-joint|no-explicit");
    train->add_option("--split", split_kind, "random|standard");
    train->add_option("--split-file", split_file, "JSON split file for --split standard");
    train->add_option("--split-seed", split_seed, "random split seed");
    train->add_option("--init-seed", init_seed, "parameter init seed");
    train->add_option("--report", report_path, "write a JSON run report here");
    train->add_option("--set", overrides, "override a config key, e.g. --set lambda=0");
    train->add_option("--threads", threads, "OpenMP thread count (0 = default)");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "run one of the analysis suites");
    std::string a_data, a_config, what, a_mode = "no-explicit";
    std::string lambdas = "0,0.5,1,2", quotas = "10,20,30,40,50";
    std::string strategies = "lead,random,close,middle,remote", counts = "100000";
    std::string split_seeds = "0,1,2,3,4", init_seeds = "0,1,2", a_out;
    std::vector<std::string> a_overrides;
    int jobs = 1, a_threads = 0;
    analyze->add_option("--data", a_data, "dataset directory (default: $HIGHWAY_DATA_DIR)");
    analyze->add_option("--config", a_config, "config file");
    analyze->add_option("--what", what, "hops|lambda-sweep|size-sweep|sampling-sweep|embeddings")
        ->required();
    analyze->add_option("--mode", a_mode, "training mode for the runs");
    analyze->add_option("--lambdas", lambdas, "comma list for lambda/size sweeps");
    analyze->add_option("--quotas", quotas, "comma list of per-class training quotas");
    analyze->add_option("--strategies", strategies, "comma list of pair sampling strategies");
    analyze->add_option("--counts", counts, "comma list of pair sample counts");
    analyze->add_option("--split-seeds", split_seeds, "comma list of split seeds");
    analyze->add_option("--init-seeds", init_seeds, "comma list of init seeds");
    analyze->add_option("--jobs", jobs, "parallel runs");
    analyze->add_option("--out", a_out, "output path (JSON; TSV for embeddings)");
    analyze->add_option("--set", a_overrides, "override a config key");
    analyze->add_option("--threads", a_threads, "OpenMP thread count (0 = default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (convert->parsed()) return cmd_convert(content, cites, out_dir);
        if (train->parsed()) {
            highway::kernels::set_threads(threads);
            HighwayConfig cfg = resolve_config(config_path, overrides);
            if (split_seed) cfg.split_seed = *split_seed;
            if (init_seed) cfg.init_seed = *init_seed;
            cfg.validate();
            return cmd_train(data_dir_or_env(data_dir), cfg, mode_name, split_kind, split_file,
                             report_path);
        }
        highway::kernels::set_threads(a_threads);
        HighwayConfig cfg = resolve_config(a_config, a_overrides);
        return cmd_analyze(data_dir_or_env(a_data), cfg, what, a_mode, lambdas, quotas,
                           strategies, counts, split_seeds, init_seeds, jobs, a_out);
    } catch (const highway::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const highway::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
