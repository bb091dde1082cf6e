#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "highway/config.hpp"
#include "highway/dataio.hpp"
#include "highway/gcn.hpp"

namespace highway {

enum class TrainMode;
struct EdgeProposal;

double accuracy(const std::vector<int>& pred, const std::vector<int>& gold,
                const std::vector<int>& index_set);
double accuracy(const ModelOutput& out, const std::vector<int>& gold,
                const std::vector<int>& index_set);

// One bucket of the hop-distance breakdown. hops is in [0, 6], where 6 means
// "6 or more"; unreachable nodes form their own bucket.
struct HopBucket {
    int hops = 0;
    bool unreachable = false;
    int count = 0;
    int correct = 0;
    double acc = 0.0;
};

struct HopBucketResult {
    std::vector<HopBucket> buckets;  // ascending hops, unreachable last

    int total_count() const;
    int total_correct() const;
};

HopBucketResult hop_bucket_accuracy(const ModelOutput& out, const std::vector<int>& gold,
                                    const std::vector<int>& eval_set,
                                    const std::vector<int>& hop_map);

// Fraction of proposals whose endpoints share a gold label. Reporting only;
// never fed back into training. Throws on an empty list.
double edge_precision(const std::vector<EdgeProposal>& proposals, const std::vector<int>& gold);

// Writes one TSV row per node: id, gold label, then the C logits.
void export_embeddings(const ModelOutput& out, const std::vector<int>& gold,
                       const std::filesystem::path& path);

struct RunRecord {
    std::uint64_t split_seed = 0;
    std::uint64_t init_seed = 0;
    double test_acc = 0.0;
};

struct SweepPoint {
    std::string label;
    double mean = 0.0;
    double stddev = 0.0;  // population standard deviation
    std::vector<RunRecord> runs;
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

struct GridPoint {
    std::string label;
    std::function<void(HighwayConfig&)> apply;
};

// Runs every (grid point x split seed x init seed) combination and aggregates
// mean/stddev per grid point. Splits are re-drawn per split seed with the
// grid point's quota. Runs may execute on `jobs` threads; merge order is
// fixed, so the result does not depend on scheduling.
SweepResult run_matrix(const Dataset& ds, const HighwayConfig& base,
                       const std::vector<std::uint64_t>& split_seeds,
                       const std::vector<std::uint64_t>& init_seeds,
                       const std::vector<GridPoint>& grid, TrainMode mode, int jobs = 1);

}  // namespace highway
