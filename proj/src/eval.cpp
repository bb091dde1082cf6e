#include "highway/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "highway/errors.hpp"
#include "highway/highway.hpp"
#include "highway/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace highway {

double accuracy(const std::vector<int>& pred, const std::vector<int>& gold,
                const std::vector<int>& index_set) {
    if (index_set.empty()) throw std::invalid_argument("accuracy: empty index set");
    long long correct = 0;
    for (int i : index_set) correct += pred[i] == gold[i] ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(index_set.size());
}

double accuracy(const ModelOutput& out, const std::vector<int>& gold,
                const std::vector<int>& index_set) {
    return accuracy(out.pred, gold, index_set);
}

int HopBucketResult::total_count() const {
    int s = 0;
    for (const auto& b : buckets) s += b.count;
    return s;
}

int HopBucketResult::total_correct() const {
    int s = 0;
    for (const auto& b : buckets) s += b.correct;
    return s;
}

HopBucketResult hop_bucket_accuracy(const ModelOutput& out, const std::vector<int>& gold,
                                    const std::vector<int>& eval_set,
                                    const std::vector<int>& hop_map) {
    constexpr int kMergeAt = 6;  // hop counts beyond this collapse into one bucket
    std::map<int, HopBucket> by_key;  // kUnreachable sorts first; moved to the back later
    for (int v : eval_set) {
        const int d = hop_map[v];
        const int key = d == kUnreachable ? kUnreachable : std::min(d, kMergeAt);
        auto& b = by_key[key];
        b.hops = key == kUnreachable ? 0 : key;
        b.unreachable = key == kUnreachable;
        b.count += 1;
        b.correct += out.pred[v] == gold[v] ? 1 : 0;
    }
    HopBucketResult res;
    for (auto& [key, b] : by_key) {
        b.acc = b.count > 0 ? static_cast<double>(b.correct) / b.count : 0.0;
        if (key != kUnreachable) res.buckets.push_back(b);
    }
    if (auto it = by_key.find(kUnreachable); it != by_key.end()) res.buckets.push_back(it->second);
    return res;
}

double edge_precision(const std::vector<EdgeProposal>& proposals, const std::vector<int>& gold) {
    if (proposals.empty()) throw std::invalid_argument("edge_precision: no proposals");
    long long match = 0;
    for (const auto& p : proposals) match += gold[p.row] == gold[p.target] ? 1 : 0;
    return static_cast<double>(match) / static_cast<double>(proposals.size());
}

void export_embeddings(const ModelOutput& out, const std::vector<int>& gold,
                       const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path.string());
    char buf[64];
    for (int i = 0; i < out.logits.rows; ++i) {
        f << i << '\t' << gold[i];
        const double* row = out.logits.row(i);
        for (int c = 0; c < out.logits.cols; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            f << '\t' << buf;
        }
        f << '\n';
    }
    if (!f) throw InputError("write failed: " + path.string());
}

SweepResult run_matrix(const Dataset& ds, const HighwayConfig& base,
                       const std::vector<std::uint64_t>& split_seeds,
                       const std::vector<std::uint64_t>& init_seeds,
                       const std::vector<GridPoint>& grid, TrainMode mode, int jobs) {
    if (split_seeds.empty() || init_seeds.empty())
        throw std::invalid_argument("run_matrix: need at least one seed of each kind");
    if (grid.empty()) throw std::invalid_argument("run_matrix: empty grid");

    struct Task {
        std::size_t grid_idx;
        std::uint64_t split_seed, init_seed;
    };
    std::vector<Task> tasks;
    for (std::size_t gi = 0; gi < grid.size(); ++gi)
        for (auto ss : split_seeds)
            for (auto is : init_seeds) tasks.push_back({gi, ss, is});

    std::vector<double> test_acc(tasks.size(), 0.0);
    std::vector<std::string> errors(tasks.size());

    auto run_one = [&](std::size_t t) {
        try {
            HighwayConfig cfg = base;
            grid[tasks[t].grid_idx].apply(cfg);
            cfg.split_seed = tasks[t].split_seed;
            cfg.init_seed = tasks[t].init_seed;
            DataSplit split = random_split(ds, cfg.split_seed, cfg.quota_per_class);
            HighwayResult r = highway_train(ds, split, cfg, mode);
            test_acc[t] = r.final_test_acc;
        } catch (const std::exception& e) {
            errors[t] = e.what();
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1 || tasks.size() == 1) {
        for (std::size_t t = 0; t < tasks.size(); ++t) run_one(t);
    } else {
#ifdef _OPENMP
        const int inner = std::max(1, omp_get_max_threads() / jobs);
#endif
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int workers = std::min<std::size_t>(jobs, tasks.size());
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
#ifdef _OPENMP
                omp_set_num_threads(inner);  // avoid oversubscribing nested teams
#endif
                for (std::size_t t = next.fetch_add(1); t < tasks.size(); t = next.fetch_add(1))
                    run_one(t);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t t = 0; t < tasks.size(); ++t)
        if (!errors[t].empty()) throw InputError("run_matrix: run failed: " + errors[t]);

    SweepResult res;
    const std::size_t per_point = split_seeds.size() * init_seeds.size();
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        SweepPoint pt;
        pt.label = grid[gi].label;
        double sum = 0.0;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (tasks[t].grid_idx != gi) continue;
            pt.runs.push_back({tasks[t].split_seed, tasks[t].init_seed, test_acc[t]});
            sum += test_acc[t];
        }
        pt.mean = sum / static_cast<double>(per_point);
        double sq = 0.0;
        for (const auto& r : pt.runs) sq += (r.test_acc - pt.mean) * (r.test_acc - pt.mean);
        pt.stddev = std::sqrt(sq / static_cast<double>(per_point));
        res.points.push_back(std::move(pt));
    }
    return res;
}

}  // namespace highway
