#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "highway/config.hpp"
#include "highway/dataio.hpp"
#include "highway/gcn.hpp"
#include "highway/graph.hpp"

namespace highway {

enum class TrainMode { Typical, Highway, NoJoint, NoExplicit };

const char* train_mode_name(TrainMode m);
TrainMode parse_train_mode(const std::string& s);

enum class ProposalSource { NodeMatrix, PairMatrix, Both };

// One candidate edge: a mask-row training node and a target node that passed
// the configured decision.
struct EdgeProposal {
    int row;
    int target;
    ProposalSource source;
};

struct IterationReport {
    int iteration = 0;
    double valid_acc = 0.0;
    double test_acc = 0.0;
    int edges_added = 0;         // new undirected edges actually inserted
    double edge_precision = -1;  // gold-label agreement of proposals; -1 when none
    int epochs_run = 0;
    int best_epoch = 0;
};

// Every ordered pair over the training set including the diagonal, row-major
// over the ascending training indices. Gold relation from label equality.
PairSet sample_pairs(const std::vector<int>& train, const std::vector<int>& labels);

// Sampled alternatives: lead takes the first `count` grid pairs; random draws
// uniformly with replacement; close/middle/remote draw with replacement with
// 3x weight on pairs whose endpoint hop distance falls in the band
// (close <= 2, middle 3-4, remote >= 5 or unreachable).
PairSet sample_pairs_strategy(const SparseGraph& g, const std::vector<int>& train,
                              const std::vector<int>& labels, PairStrategy strategy,
                              long long count, Rng& rng);

// Binary rows of the node-agreement matrix: entry j is 1 iff the predictions
// of `row` and j match and both confidences strictly exceed t_n.
std::vector<std::uint8_t> node_matrix_row(const ModelOutput& out, double t_n, int row);

// Binary rows of the pair-score matrix: entry j is 1 iff
// sigmoid(dot(y_row, y_j)) >= t_p (boundary inclusive).
std::vector<std::uint8_t> pair_matrix_row(const Matrix& logits, double t_p, int row);

std::vector<std::vector<std::uint8_t>> node_matrix_rows(const ModelOutput& out, double t_n,
                                                        const std::vector<int>& rows);
std::vector<std::vector<std::uint8_t>> pair_matrix_rows(const Matrix& logits, double t_p,
                                                        const std::vector<int>& rows);

// One training node per category: lowest index (First) or highest model
// confidence (Confident). Throws InputError if a category has no training
// node.
std::vector<int> build_mask_rows(const std::vector<int>& train, const std::vector<int>& labels,
                                 int num_classes, MaskPolicy policy,
                                 const ModelOutput* out = nullptr);

// Candidate edges from the mask rows: target j is proposed iff the node
// matrix fires, the pair matrix fires (unless use_pair_matrix is off), the
// edge does not already exist and j != row.
std::vector<EdgeProposal> propose_edges(const ModelOutput& out, const HighwayConfig& cfg,
                                        const std::vector<int>& mask_rows, const SparseGraph& g,
                                        bool use_pair_matrix = true);

struct HighwayResult {
    std::vector<IterationReport> iterations;
    double final_test_acc = 0.0;
    double final_valid_acc = 0.0;
    int best_iteration = 0;
    long long total_edges_added = 0;
    SparseGraph final_graph;
    ModelOutput final_output;  // checkpoint the reported accuracy comes from
};

// The outer self-training loop: train, compare validation accuracy with the
// previous iteration, stop on regression, otherwise add the jointly decided
// edges and retrain a fresh model on the rewired graph.
HighwayResult highway_train(const Dataset& ds, const DataSplit& split, const HighwayConfig& cfg,
                            TrainMode mode);

}  // namespace highway
