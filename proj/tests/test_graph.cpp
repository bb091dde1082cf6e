#include <doctest.h>

#include <cmath>
#include <set>

#include "highway/graph.hpp"
#include "highway/rng.hpp"
#include "support/oracles.hpp"

using namespace highway;

namespace {

SparseGraph random_graph(int n, double density, Rng& rng) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.next_unit() < density) edges.emplace_back(i, j);
    return SparseGraph::from_edges(n, edges);
}

std::set<std::pair<int, int>> edge_set(const SparseGraph& g) {
    std::set<std::pair<int, int>> s;
    for (int u = 0; u < g.n; ++u)
        for (int v : g.neighbors(u)) s.emplace(u, v);
    return s;
}

double adj_value(const NormalizedAdjacency& a, int i, int j) {
    for (int e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e)
        if (a.col[e] == j) return a.val[e];
    return 0.0;
}

}  // namespace

TEST_CASE("from_edges symmetrizes, sorts and deduplicates") {
    SparseGraph g = SparseGraph::from_edges(4, {{2, 1}, {1, 2}, {0, 3}, {3, 3}});
    CHECK(g.undirected_edge_count() == 2);
    CHECK(g.has_edge(1, 2));
    CHECK(g.has_edge(2, 1));
    CHECK(g.has_edge(0, 3));
    CHECK(!g.has_edge(3, 3));  // self-loops dropped
    for (int u = 0; u < g.n; ++u) {
        auto nb = g.neighbors(u);
        for (std::size_t k = 1; k < nb.size(); ++k) CHECK(nb[k] > nb[k - 1]);
    }
    CHECK_THROWS_AS(SparseGraph::from_edges(2, {{0, 2}}), std::out_of_range);
}

TEST_CASE("normalization of an isolated node is the identity") {
    SparseGraph g = SparseGraph::from_edges(1, {});
    auto a = normalize_adjacency(g);
    REQUIRE(a.nnz() == 1);
    CHECK(a.val[0] == doctest::Approx(1.0));
}

TEST_CASE("normalization of a single edge gives four 0.5 entries") {
    SparseGraph g = SparseGraph::from_edges(2, {{0, 1}});
    auto a = normalize_adjacency(g);
    REQUIRE(a.nnz() == 4);
    for (double v : a.val) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("normalization of the 3-path matches hand computation") {
    // degrees with self-loops: (2, 3, 2)
    SparseGraph g = SparseGraph::from_edges(3, {{0, 1}, {1, 2}});
    auto a = normalize_adjacency(g);
    CHECK(adj_value(a, 0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-12));
    CHECK(adj_value(a, 1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(adj_value(a, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normalization properties on random graphs") {
    Rng rng(21);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 1 + rng.next_index(30);
        SparseGraph g = random_graph(n, 0.15, rng);
        auto a = normalize_adjacency(g);
        // sparsity pattern is A + I
        REQUIRE(a.nnz() == static_cast<int>(g.col_idx.size()) + n);
        for (int i = 0; i < n; ++i) {
            double row_sum = 0.0;
            bool diag_seen = false;
            for (int e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
                row_sum += a.val[e];
                if (a.col[e] == i) {
                    diag_seen = true;
                    CHECK(a.val[e] > 0.0);
                }
                // symmetry to machine precision
                CHECK(a.val[e] == adj_value(a, a.col[e], i));
            }
            CHECK(diag_seen);
            // row i sums to (1/sqrt(deg_i)) * sum_j 1/sqrt(deg_j) over the
            // closed neighborhood: positive, at most sqrt(deg_i), and not in
            // general <= 1 (a star center exceeds 1)
            const double deg = static_cast<double>(g.degree(i) + 1);
            CHECK(row_sum > 0.0);
            CHECK(row_sum <= std::sqrt(deg) + 1e-12);
        }
    }
}

TEST_CASE("normalization rows sum to exactly one on regular graphs") {
    // a cycle is 2-regular: every closed neighborhood has degree 3
    std::vector<std::pair<int, int>> ring;
    for (int v = 0; v < 8; ++v) ring.emplace_back(v, (v + 1) % 8);
    auto a = normalize_adjacency(SparseGraph::from_edges(8, ring));
    for (int i = 0; i < 8; ++i) {
        double row_sum = 0.0;
        for (int e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) row_sum += a.val[e];
        CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("add_edges handles duplicates, self pairs and empty lists") {
    SparseGraph g = SparseGraph::from_edges(3, {{0, 1}});
    CHECK(edge_set(add_edges(g, {{0, 1}, {1, 0}})) == edge_set(g));  // OR is idempotent
    CHECK(edge_set(add_edges(g, {})) == edge_set(g));
    CHECK(edge_set(add_edges(g, {{2, 2}})) == edge_set(g));

    SparseGraph empty = SparseGraph::from_edges(3, {});
    auto grown = add_edges(empty, {{0, 2}});
    CHECK(edge_set(grown) == std::set<std::pair<int, int>>{{0, 2}, {2, 0}});
    CHECK_THROWS_AS(add_edges(g, {{0, 5}}), std::out_of_range);
}

TEST_CASE("add_edges is monotone and idempotent on random inputs") {
    Rng rng(22);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + rng.next_index(25);
        SparseGraph g = random_graph(n, 0.1, rng);
        std::vector<std::pair<int, int>> adds;
        const int k = rng.next_index(8);
        for (int i = 0; i < k; ++i) adds.emplace_back(rng.next_index(n), rng.next_index(n));

        SparseGraph once = add_edges(g, adds);
        SparseGraph twice = add_edges(once, adds);
        auto before = edge_set(g), after = edge_set(once);
        CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
        CHECK(edge_set(twice) == after);
        // original untouched
        CHECK(edge_set(g) == before);
    }
}

TEST_CASE("hop distances on hand-built graphs") {
    // chain a - b - c, a labeled with c's category
    SparseGraph g = SparseGraph::from_edges(3, {{0, 1}, {1, 2}});
    std::vector<int> labels = {0, 1, 0};
    auto map = hop_distances(g, {0}, labels);
    CHECK(map.dist[0] == 0);  // the labeled node itself
    CHECK(map.dist[2] == 2);
    CHECK(map.dist[1] == kUnreachable);  // no labeled node of category 1

    // disconnected component without a same-category labeled node
    SparseGraph g2 = SparseGraph::from_edges(4, {{0, 1}, {2, 3}});
    std::vector<int> labels2 = {0, 0, 0, 0};
    auto map2 = hop_distances(g2, {0}, labels2);
    CHECK(map2.dist[1] == 1);
    CHECK(map2.dist[2] == kUnreachable);
    CHECK(map2.dist[3] == kUnreachable);

    CHECK_THROWS_AS(hop_distances(g, {}, labels), std::invalid_argument);
}

TEST_CASE("hop distances agree with the all-pairs oracle") {
    Rng rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + rng.next_index(49);
        SparseGraph g = random_graph(n, 0.08, rng);
        std::vector<int> labels(n);
        const int classes = 2 + rng.next_index(3);
        for (int v = 0; v < n; ++v) labels[v] = rng.next_index(classes);
        std::vector<int> train;
        for (int v = 0; v < n; ++v)
            if (rng.next_unit() < 0.2) train.push_back(v);
        if (train.empty()) train.push_back(rng.next_index(n));

        auto map = hop_distances(g, train, labels);
        auto oracle = testsupport::all_pairs_hops(g);
        for (int v = 0; v < n; ++v) {
            int want = kUnreachable;
            for (int t : train) {
                if (labels[t] != labels[v]) continue;
                const int d = oracle[v][t];
                if (d != kUnreachable && (want == kUnreachable || d < want)) want = d;
            }
            CHECK(map.dist[v] == want);
        }
    }
}

TEST_CASE("hop distance of d>0 implies a neighbor at d-1 on the category BFS field") {
    Rng rng(24);
    SparseGraph g = random_graph(40, 0.1, rng);
    std::vector<int> labels(40);
    for (int v = 0; v < 40; ++v) labels[v] = v % 3;
    std::vector<int> train = {0, 1, 2, 3};
    auto map = hop_distances(g, train, labels);
    for (int c = 0; c < 3; ++c) {
        std::vector<int> sources;
        for (int t : train)
            if (labels[t] == c) sources.push_back(t);
        auto field = bfs_distances(g, sources);
        for (int v = 0; v < g.n; ++v) {
            if (labels[v] != c) continue;
            CHECK(map.dist[v] == field[v]);
            if (field[v] <= 0) continue;
            bool found = false;
            for (int u : g.neighbors(v)) found = found || field[u] == field[v] - 1;
            CHECK(found);
        }
    }
}
