#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "highway/graph.hpp"
#include "highway/matrix.hpp"

namespace highway {

// A loaded citation dataset. Feature rows are L1-normalized unless loading
// was asked not to; every node carries exactly one label in [0, C).
struct Dataset {
    SparseGraph graph;
    CsrMatrix features;              // n x h, sparse rows
    std::vector<int> labels;         // size n
    std::vector<std::string> names;  // category id -> label string

    int num_nodes() const { return graph.n; }
    int num_classes() const { return static_cast<int>(names.size()); }
    int feature_dim() const { return features.cols; }
};

struct DataSplit {
    std::vector<int> train, valid, test;  // pairwise disjoint, each sorted ascending
    std::uint64_t seed = 0;
};

struct ConvertStats {
    int nodes = 0;
    long long edges = 0;        // undirected edges written
    int dangling_dropped = 0;   // cite lines referencing unknown ids
    int duplicate_dropped = 0;  // repeated or self cites
};

// Canonical on-disk format, one dataset per directory:
//   nodes.tsv: <string-id> \t <label-string> \t <idx>:<val> <idx>:<val> ...
//   edges.tsv: <string-id> \t <string-id>
Dataset load_canonical(const std::filesystem::path& dir, bool normalize_features = true);

// Converts the public <id>\t<feat...>\t<label> / <id>\t<id> citation files
// into the canonical format. Dangling cites are dropped, not errors.
ConvertStats convert_citation_files(const std::filesystem::path& content_path,
                                    const std::filesystem::path& cites_path,
                                    const std::filesystem::path& out_dir);

// Stratified random split: per category, `train_per_class` training nodes and
// `valid_per_class` validation nodes drawn without replacement; the remainder
// is the test set. Deterministic per seed.
DataSplit random_split(const Dataset& ds, std::uint64_t seed, int train_per_class = 20,
                       int valid_per_class = 30);

// Fixed split loaded verbatim from a JSON file with integer arrays
// "train", "valid", "test".
DataSplit standard_split(const Dataset& ds, const std::filesystem::path& split_file);

}  // namespace highway
