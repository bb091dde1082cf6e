#include "highway/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "highway/errors.hpp"

namespace highway {

SparseGraph SparseGraph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n < 0) throw std::out_of_range("node count must be non-negative");
    std::vector<std::pair<int, int>> dir;
    dir.reserve(edges.size() * 2);
    for (const auto& [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n)
            throw std::out_of_range("edge endpoint out of range");
        if (u == v) continue;
        dir.emplace_back(u, v);
        dir.emplace_back(v, u);
    }
    std::sort(dir.begin(), dir.end());
    dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

    SparseGraph g;
    g.n = n;
    g.row_ptr.assign(n + 1, 0);
    g.col_idx.reserve(dir.size());
    for (const auto& [u, v] : dir) ++g.row_ptr[u + 1];
    for (int i = 0; i < n; ++i) g.row_ptr[i + 1] += g.row_ptr[i];
    for (const auto& [u, v] : dir) g.col_idx.push_back(v);  // already sorted by (u, v)
    return g;
}

bool SparseGraph::has_edge(int u, int v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

NormalizedAdjacency normalize_adjacency(const SparseGraph& g) {
    // degrees of A + I
    std::vector<double> inv_sqrt(g.n);
    for (int i = 0; i < g.n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));

    NormalizedAdjacency a;
    a.rows = a.cols = g.n;
    a.row_ptr.assign(g.n + 1, 0);
    a.col.reserve(g.col_idx.size() + g.n);
    a.val.reserve(g.col_idx.size() + g.n);
    for (int i = 0; i < g.n; ++i) {
        auto nb = g.neighbors(i);
        std::size_t k = 0;
        // merge the self-loop into the sorted neighbor run
        while (k < nb.size() && nb[k] < i) {
            a.col.push_back(nb[k]);
            a.val.push_back(inv_sqrt[i] * inv_sqrt[nb[k]]);
            ++k;
        }
        a.col.push_back(i);
        a.val.push_back(inv_sqrt[i] * inv_sqrt[i]);
        while (k < nb.size()) {
            a.col.push_back(nb[k]);
            a.val.push_back(inv_sqrt[i] * inv_sqrt[nb[k]]);
            ++k;
        }
        a.row_ptr[i + 1] = static_cast<int>(a.col.size());
    }
    return a;
}

SparseGraph add_edges(const SparseGraph& g, const std::vector<std::pair<int, int>>& additions) {
    for (const auto& [u, v] : additions)
        if (u < 0 || u >= g.n || v < 0 || v >= g.n)
            throw std::out_of_range("edge addition endpoint out of range");

    std::vector<std::pair<int, int>> dir;
    dir.reserve(g.col_idx.size() + additions.size() * 2);
    for (int i = 0; i < g.n; ++i)
        for (int v : g.neighbors(i)) dir.emplace_back(i, v);
    for (const auto& [u, v] : additions) {
        if (u == v) continue;
        dir.emplace_back(u, v);
        dir.emplace_back(v, u);
    }
    std::sort(dir.begin(), dir.end());
    dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

    SparseGraph out;
    out.n = g.n;
    out.row_ptr.assign(g.n + 1, 0);
    out.col_idx.reserve(dir.size());
    for (const auto& [u, v] : dir) ++out.row_ptr[u + 1];
    for (int i = 0; i < g.n; ++i) out.row_ptr[i + 1] += out.row_ptr[i];
    for (const auto& [u, v] : dir) out.col_idx.push_back(v);
    return out;
}

std::vector<int> bfs_distances(const SparseGraph& g, std::span<const int> sources) {
    std::vector<int> dist(g.n, kUnreachable);
    std::queue<int> q;
    for (int s : sources) {
        if (s < 0 || s >= g.n) throw std::out_of_range("BFS source out of range");
        if (dist[s] != 0) {
            dist[s] = 0;
            q.push(s);
        }
    }
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : g.neighbors(u)) {
            if (dist[v] == kUnreachable) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    return dist;
}

HopDistanceMap hop_distances(const SparseGraph& g, const std::vector<int>& train,
                             const std::vector<int>& labels) {
    if (train.empty()) throw std::invalid_argument("hop_distances: empty training set");
    if (static_cast<int>(labels.size()) != g.n)
        throw std::invalid_argument("hop_distances: label count != node count");

    int num_classes = 0;
    for (int l : labels) num_classes = std::max(num_classes, l + 1);

    HopDistanceMap map;
    map.dist.assign(g.n, kUnreachable);
    std::vector<int> sources;
    for (int c = 0; c < num_classes; ++c) {
        sources.clear();
        for (int t : train)
            if (labels[t] == c) sources.push_back(t);
        if (sources.empty()) continue;  // no labeled node of this class: stays unreachable
        std::vector<int> d = bfs_distances(g, sources);
        for (int v = 0; v < g.n; ++v)
            if (labels[v] == c) map.dist[v] = d[v];
    }
    return map;
}

}  // namespace highway
