#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace highway {

enum class MaskPolicy { First, Confident };

// How node pairs for the pair-classification task are drawn from the
// training set. FullGrid is the default: every ordered pair including the
// diagonal.
enum class PairStrategy { FullGrid, Lead, Random, Close, Middle, Remote };

struct HighwayConfig {
    double lambda = 1.0;       // pair-loss weight; 0 disables the pair task
    double t_n = 0.9;          // node-confidence threshold (strict >)
    double t_p = 0.9;          // pair-score threshold (inclusive >=)
    int epochs = 200;          // max epochs per inner training run
    int patience = 10;         // early stopping on validation accuracy
    int max_t = 10;            // max outer iterations
    double lr = 3e-3;
    double dropout = 0.5;
    int hidden = 64;
    double weight_decay = 5e-4;
    double pos_weight = 0.0;   // weight of positive pairs; 0 = auto (#neg / #pos)
    int quota_per_class = 20;  // training nodes per category for random splits
    MaskPolicy mask_policy = MaskPolicy::First;
    bool literal_algorithm = false;  // report the regressed iteration's accuracy
    int proposal_cap = 0;            // max edge proposals per mask row; 0 = unlimited
    bool continue_training = false;  // warm-start each iteration from the previous one
    bool normalize_features = true;
    PairStrategy pair_strategy = PairStrategy::FullGrid;
    long long pair_count = 100000;  // sample size for non-grid strategies

    std::uint64_t split_seed = 0;
    std::uint64_t init_seed = 0;

    void validate() const;  // throws ConfigError
};

// Flat `key = value` file; '#' starts a comment. Unknown keys are errors.
HighwayConfig load_config_file(const std::filesystem::path& path);

// Applies one `key=value` override (CLI precedence over file values).
void apply_override(HighwayConfig& cfg, const std::string& key, const std::string& value);

const char* mask_policy_name(MaskPolicy p);
const char* pair_strategy_name(PairStrategy s);
PairStrategy parse_pair_strategy(const std::string& s);

}  // namespace highway
