#include "highway/highway.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "highway/errors.hpp"
#include "highway/eval.hpp"
#include "highway/kernels.hpp"

namespace highway {

const char* train_mode_name(TrainMode m) {
    switch (m) {
        case TrainMode::Typical: return "typical";
        case TrainMode::Highway: return "highway";
        case TrainMode::NoJoint: return "no-joint";
        case TrainMode::NoExplicit: return "no-explicit";
    }
    return "typical";
}

TrainMode parse_train_mode(const std::string& s) {
    if (s == "typical") return TrainMode::Typical;
    if (s == "highway") return TrainMode::Highway;
    if (s == "no-joint") return TrainMode::NoJoint;
    if (s == "no-explicit") return TrainMode::NoExplicit;
    throw ConfigError("unknown mode '" + s + "'");
}

PairSet sample_pairs(const std::vector<int>& train, const std::vector<int>& labels) {
    if (train.empty()) throw std::invalid_argument("sample_pairs: empty training set");
    PairSet ps;
    ps.pairs.reserve(train.size() * train.size());
    for (int i : train)
        for (int j : train) ps.pairs.push_back({i, j, labels[i] == labels[j], 1.0});
    return ps;
}

PairSet sample_pairs_strategy(const SparseGraph& g, const std::vector<int>& train,
                              const std::vector<int>& labels, PairStrategy strategy,
                              long long count, Rng& rng) {
    if (train.empty()) throw std::invalid_argument("sample_pairs_strategy: empty training set");
    if (count < 1) throw std::invalid_argument("sample_pairs_strategy: count must be >= 1");
    const long long t = static_cast<long long>(train.size());

    if (strategy == PairStrategy::FullGrid) return sample_pairs(train, labels);

    if (strategy == PairStrategy::Lead) {
        PairSet ps;
        const long long take = std::min(count, t * t);
        ps.pairs.reserve(take);
        for (long long k = 0; k < take; ++k) {
            int i = train[k / t];
            int j = train[k % t];
            ps.pairs.push_back({i, j, labels[i] == labels[j], 1.0});
        }
        return ps;
    }

    if (strategy == PairStrategy::Random) {
        PairSet ps;
        ps.pairs.reserve(count);
        for (long long k = 0; k < count; ++k) {
            int i = train[rng.next_index(static_cast<int>(t))];
            int j = train[rng.next_index(static_cast<int>(t))];
            ps.pairs.push_back({i, j, labels[i] == labels[j], 1.0});
        }
        return ps;
    }

    // distance-banded strategies need the hop distance between pair endpoints
    std::vector<std::vector<int>> dist(train.size());
    for (std::size_t a = 0; a < train.size(); ++a) {
        int src[1] = {train[a]};
        std::vector<int> full = bfs_distances(g, src);
        dist[a].resize(train.size());
        for (std::size_t b = 0; b < train.size(); ++b) dist[a][b] = full[train[b]];
    }
    auto in_band = [&](int d) {
        switch (strategy) {
            case PairStrategy::Close: return d != kUnreachable && d <= 2;
            case PairStrategy::Middle: return d >= 3 && d <= 4;
            default: return d == kUnreachable || d >= 5;  // Remote
        }
    };
    std::vector<double> cumulative(train.size() * train.size());
    double acc = 0.0;
    for (std::size_t a = 0; a < train.size(); ++a)
        for (std::size_t b = 0; b < train.size(); ++b) {
            acc += in_band(dist[a][b]) ? 3.0 : 1.0;
            cumulative[a * train.size() + b] = acc;
        }

    PairSet ps;
    ps.pairs.reserve(count);
    for (long long k = 0; k < count; ++k) {
        const double r = rng.next_unit() * acc;
        const std::size_t cell =
            std::lower_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin();
        const std::size_t safe = std::min(cell, cumulative.size() - 1);
        int i = train[safe / train.size()];
        int j = train[safe % train.size()];
        ps.pairs.push_back({i, j, labels[i] == labels[j], 1.0});
    }
    return ps;
}

std::vector<std::uint8_t> node_matrix_row(const ModelOutput& out, double t_n, int row) {
    const int n = out.logits.rows;
    if (row < 0 || row >= n) throw std::out_of_range("node_matrix_row: row out of range");
    std::vector<std::uint8_t> r(n, 0);
    if (!(out.conf[row] > t_n)) return r;  // strict: the row node itself must pass
    for (int j = 0; j < n; ++j)
        r[j] = (out.pred[j] == out.pred[row] && out.conf[j] > t_n) ? 1 : 0;
    return r;
}

std::vector<std::uint8_t> pair_matrix_row(const Matrix& logits, double t_p, int row) {
    const int n = logits.rows;
    if (row < 0 || row >= n) throw std::out_of_range("pair_matrix_row: row out of range");
    std::vector<std::uint8_t> r(n, 0);
    for (int j = 0; j < n; ++j) r[j] = pair_score(logits, row, j) >= t_p ? 1 : 0;
    return r;
}

std::vector<std::vector<std::uint8_t>> node_matrix_rows(const ModelOutput& out, double t_n,
                                                        const std::vector<int>& rows) {
    std::vector<std::vector<std::uint8_t>> result;
    result.reserve(rows.size());
    for (int r : rows) result.push_back(node_matrix_row(out, t_n, r));
    return result;
}

std::vector<std::vector<std::uint8_t>> pair_matrix_rows(const Matrix& logits, double t_p,
                                                        const std::vector<int>& rows) {
    std::vector<std::vector<std::uint8_t>> result;
    result.reserve(rows.size());
    for (int r : rows) result.push_back(pair_matrix_row(logits, t_p, r));
    return result;
}

std::vector<int> build_mask_rows(const std::vector<int>& train, const std::vector<int>& labels,
                                 int num_classes, MaskPolicy policy, const ModelOutput* out) {
    if (policy == MaskPolicy::Confident && out == nullptr)
        throw std::invalid_argument("build_mask_rows: confident policy needs model output");
    std::vector<int> rows(num_classes, -1);
    for (int t : train) {
        const int c = labels[t];
        if (rows[c] < 0) {
            rows[c] = t;
        } else if (policy == MaskPolicy::First) {
            rows[c] = std::min(rows[c], t);
        } else if (out->conf[t] > out->conf[rows[c]]) {
            rows[c] = t;
        }
    }
    for (int c = 0; c < num_classes; ++c)
        if (rows[c] < 0)
            throw InputError("build_mask_rows: category " + std::to_string(c) +
                             " has no training node");
    return rows;
}

std::vector<EdgeProposal> propose_edges(const ModelOutput& out, const HighwayConfig& cfg,
                                        const std::vector<int>& mask_rows, const SparseGraph& g,
                                        bool use_pair_matrix) {
    std::vector<EdgeProposal> proposals;
    std::vector<std::uint8_t> adjacent(g.n, 0);
    for (int a : mask_rows) {
        const auto nm = node_matrix_row(out, cfg.t_n, a);
        std::vector<std::uint8_t> pm;
        if (use_pair_matrix) pm = pair_matrix_row(out.logits, cfg.t_p, a);

        for (int v : g.neighbors(a)) adjacent[v] = 1;
        int taken = 0;
        for (int j = 0; j < g.n; ++j) {
            if (j == a || adjacent[j]) continue;
            if (!nm[j]) continue;
            if (use_pair_matrix && !pm[j]) continue;
            proposals.push_back(
                {a, j, use_pair_matrix ? ProposalSource::Both : ProposalSource::NodeMatrix});
            if (cfg.proposal_cap > 0 && ++taken >= cfg.proposal_cap) break;
        }
        for (int v : g.neighbors(a)) adjacent[v] = 0;
    }
    return proposals;
}

HighwayResult highway_train(const Dataset& ds, const DataSplit& split, const HighwayConfig& cfg,
                            TrainMode mode) {
    cfg.validate();
    if (split.train.empty()) throw InputError("highway_train: empty training set");

    SparseGraph graph = ds.graph;
    NormalizedAdjacency adj = normalize_adjacency(graph);
    const CsrMatrix& x = ds.features;
    const CscIndex xt = build_csc_index(x);

    const bool single_shot = (mode == TrainMode::Typical || mode == TrainMode::NoExplicit);
    const int max_t = single_shot ? 1 : cfg.max_t;

    Rng pair_rng(mix_seed(cfg.init_seed, 0xFA17));
    const PairSet pairs = sample_pairs_strategy(graph, split.train, ds.labels, cfg.pair_strategy,
                                                cfg.pair_count, pair_rng);

    HighwayResult result;
    double prev_valid = 0.0;  // valid_acc_0
    double best_valid = -1.0;
    double best_test = 0.0;
    ModelOutput best_output;
    ModelOutput last_output;
    GcnParameters carried;  // previous checkpoint, for continue_training

    for (int iter = 1; iter <= max_t; ++iter) {
        const std::uint64_t run_seed = mix_seed(cfg.init_seed, 0x100 + iter);
        const GcnParameters* warm = (cfg.continue_training && iter > 1) ? &carried : nullptr;
        InnerResult inner = train_inner(adj, x, xt, split.train, split.valid, ds.labels, pairs,
                                        cfg, run_seed, warm);
        if (cfg.continue_training) carried = inner.params;
        const double valid_acc = inner.best_valid_acc;
        const double test_acc = accuracy(inner.output.pred, ds.labels, split.test);
        if (valid_acc > best_valid) {
            best_valid = valid_acc;
            best_test = test_acc;
            best_output = inner.output;
            result.best_iteration = iter;
        }

        IterationReport rep;
        rep.iteration = iter;
        rep.valid_acc = valid_acc;
        rep.test_acc = test_acc;
        rep.epochs_run = static_cast<int>(inner.history.size());
        rep.best_epoch = inner.best_epoch;

        const bool regressed = valid_acc <= prev_valid;
        bool fixpoint = false;
        if (!regressed && iter < max_t) {
            auto mask_rows = build_mask_rows(split.train, ds.labels, ds.num_classes(),
                                             cfg.mask_policy, &inner.output);
            auto proposals =
                propose_edges(inner.output, cfg, mask_rows, graph, mode != TrainMode::NoJoint);
            if (!proposals.empty()) {
                std::vector<std::pair<int, int>> additions;
                additions.reserve(proposals.size());
                for (const auto& p : proposals) additions.emplace_back(p.row, p.target);
                SparseGraph next = add_edges(graph, additions);
                rep.edges_added =
                    static_cast<int>(next.undirected_edge_count() - graph.undirected_edge_count());
                rep.edge_precision = edge_precision(proposals, ds.labels);
                result.total_edges_added += rep.edges_added;
                graph = std::move(next);
                adj = normalize_adjacency(graph);
            } else if (!cfg.literal_algorithm) {
                fixpoint = true;  // nothing to add: the next iteration would see the same graph
            }
        }
        result.iterations.push_back(rep);
        last_output = std::move(inner.output);

        if (regressed || fixpoint) break;
        prev_valid = valid_acc;
    }

    const IterationReport& last = result.iterations.back();
    if (cfg.literal_algorithm) {
        result.final_test_acc = last.test_acc;
        result.final_valid_acc = last.valid_acc;
        result.final_output = std::move(last_output);
    } else {
        result.final_test_acc = best_test;
        result.final_valid_acc = best_valid;
        result.final_output = std::move(best_output);
    }
    result.final_graph = std::move(graph);
    return result;
}

}  // namespace highway
