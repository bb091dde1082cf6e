#pragma once

#include <cstdint>
#include <vector>

#include "highway/config.hpp"
#include "highway/graph.hpp"
#include "highway/matrix.hpp"
#include "highway/rng.hpp"

namespace highway {

// Two-layer GCN weights plus Adam moment state.
struct GcnParameters {
    Matrix w1, w2;          // h x d, d x C
    Matrix m1, v1, m2, v2;  // Adam first/second moments
    long step = 0;
};

// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)); moments zero.
GcnParameters init_parameters(int input_dim, int hidden_dim, int num_classes, std::uint64_t seed);

struct ModelOutput {
    Matrix logits;             // n x C second-layer output, pre-softmax
    Matrix probs;              // softmax rows
    std::vector<int> pred;     // argmax per node
    std::vector<double> conf;  // max class probability per node
};

// One ordered node pair with its gold relation (same category or not).
struct NodePair {
    int i, j;
    bool positive;
    double weight = 1.0;
};

struct PairSet {
    std::vector<NodePair> pairs;

    long long positive_count() const;
    bool empty() const { return pairs.empty(); }
    std::size_t size() const { return pairs.size(); }
};

// Intermediates captured by a training-mode forward pass for the backward
// pass. Dropout masks live here so gradients see the same masks.
struct ForwardTape {
    std::vector<double> x_vals;   // feature values after input dropout (empty: use x.val)
    Matrix z1;                    // layer-1 pre-activation
    Matrix h1;                    // dropout(relu(z1)), the layer-2 input
    std::vector<double> h1_mask;  // dropout scale per h1 entry (empty when off)
};

// y = A * relu(A * drop(X) * W1) * W2 with inverted dropout on the input
// features and hidden activations, applied only when `training` is set.
ModelOutput forward(const NormalizedAdjacency& adj, const CsrMatrix& x, const GcnParameters& p,
                    double dropout_rate, Rng& rng, bool training, ForwardTape* tape = nullptr);

// sigmoid(dot(y_i, y_j)) per requested pair; never materializes n x n.
// Scores are clamped into (0, 1) so downstream logs are finite.
double pair_score(const Matrix& logits, int i, int j);
std::vector<double> pair_scores(const Matrix& logits, const PairSet& pairs);

// Summed negative log of the gold-class probability over training nodes.
double node_loss(const ModelOutput& out, const std::vector<int>& train,
                 const std::vector<int>& labels);

// Summed binary cross entropy over the pair set, positives scaled by
// pos_weight.
double pair_loss(const Matrix& logits, const PairSet& pairs, double pos_weight);

inline double combined_loss(double node, double pair, double lambda) {
    return node + lambda * pair;
}

// #negative / #positive from the pair set; 1 when either side is empty.
double auto_pos_weight(const PairSet& pairs);

struct Gradients {
    Matrix w1, w2;
};

// Exact reverse-mode gradients of node_loss + lambda * pair_loss through the
// forward pass recorded in `tape`. When lambda is 0 the pair path is skipped
// entirely, so the result is bitwise equal to node-only training.
Gradients backward(const NormalizedAdjacency& adj, const CsrMatrix& x, const CscIndex& xt,
                   const GcnParameters& p, const ForwardTape& tape, const ModelOutput& out,
                   const std::vector<int>& train, const std::vector<int>& labels,
                   const PairSet& pairs, double lambda, double pos_weight);

// Adam with beta1=0.9, beta2=0.999, eps=1e-8; L2 weight decay is added to
// the gradients before the moment update.
void adam_step(GcnParameters& p, const Gradients& g, double lr, double weight_decay);

struct EpochRecord {
    int epoch;
    double node_loss, pair_loss, total_loss;
    double valid_acc;
};

struct InnerResult {
    GcnParameters params;  // best-validation checkpoint
    ModelOutput output;    // eval-mode output at that checkpoint
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_valid_acc = 0.0;
    double pos_weight = 1.0;  // resolved value actually used
};

// One full-batch training run with early stopping on validation accuracy:
// stops once `patience` consecutive epochs fail to improve it, and returns
// the best-validation checkpoint. Deterministic given (inputs, run_seed).
// `warm_start`, when given, replaces the fresh Glorot initialization.
InnerResult train_inner(const NormalizedAdjacency& adj, const CsrMatrix& x, const CscIndex& xt,
                        const std::vector<int>& train, const std::vector<int>& valid,
                        const std::vector<int>& labels, const PairSet& pairs,
                        const HighwayConfig& cfg, std::uint64_t run_seed,
                        const GcnParameters* warm_start = nullptr);

}  // namespace highway
