#pragma once

#include <span>
#include <utility>
#include <vector>

#include "highway/matrix.hpp"

namespace highway {

inline constexpr int kUnreachable = -1;

// Undirected graph as a CSR structure. Every edge is stored in both
// directions; column indices are unique and ascending within a row; no
// self-loops. Immutable after construction.
struct SparseGraph {
    int n = 0;
    std::vector<int> row_ptr;  // size n + 1
    std::vector<int> col_idx;  // size 2 * undirected edge count

    // Builds from an edge list; symmetrizes, drops duplicates and self-loops.
    // Throws std::out_of_range for indices outside [0, n).
    static SparseGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges);

    int degree(int v) const { return row_ptr[v + 1] - row_ptr[v]; }

    std::span<const int> neighbors(int v) const {
        return {col_idx.data() + row_ptr[v], col_idx.data() + row_ptr[v + 1]};
    }

    bool has_edge(int u, int v) const;

    long long undirected_edge_count() const { return static_cast<long long>(col_idx.size()) / 2; }
};

// Symmetric propagation operator D^-1/2 (A+I) D^-1/2; the self-loops exist
// only here, never in SparseGraph.
using NormalizedAdjacency = CsrMatrix;

NormalizedAdjacency normalize_adjacency(const SparseGraph& g);

// Returns a new graph with every (i,j) pair inserted symmetrically. Pairs
// already present, duplicates and self-pairs are ignored; `g` is not touched.
SparseGraph add_edges(const SparseGraph& g, const std::vector<std::pair<int, int>>& additions);

// Per-node minimum hop count to any training node of the same gold label;
// kUnreachable where no such node can be reached.
struct HopDistanceMap {
    std::vector<int> dist;
};

HopDistanceMap hop_distances(const SparseGraph& g, const std::vector<int>& train,
                             const std::vector<int>& labels);

// Plain BFS from a set of sources; kUnreachable where not reached.
std::vector<int> bfs_distances(const SparseGraph& g, std::span<const int> sources);

}  // namespace highway
