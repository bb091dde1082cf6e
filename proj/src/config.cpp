#include "highway/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "highway/errors.hpp"

namespace highway {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: '" + v + "'");
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    std::string s = lower(v);
    if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "off" || s == "no") return false;
    throw ConfigError("config key '" + key + "': not a boolean: '" + v + "'");
}

}  // namespace

void HighwayConfig::validate() const {
    if (lambda < 0) throw ConfigError("lambda must be >= 0");
    if (t_n < 0 || t_n > 1) throw ConfigError("t_n must be in [0,1]");
    if (t_p < 0 || t_p > 1) throw ConfigError("t_p must be in [0,1]");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (max_t < 1) throw ConfigError("max_t must be >= 1");
    if (lr <= 0) throw ConfigError("lr must be > 0");
    if (dropout < 0 || dropout >= 1) throw ConfigError("dropout must be in [0,1)");
    if (hidden < 1) throw ConfigError("hidden must be >= 1");
    if (weight_decay < 0) throw ConfigError("weight_decay must be >= 0");
    if (pos_weight < 0) throw ConfigError("pos_weight must be >= 0 (0 = auto)");
    if (quota_per_class < 1) throw ConfigError("quota_per_class must be >= 1");
    if (proposal_cap < 0) throw ConfigError("proposal_cap must be >= 0");
    if (pair_strategy != PairStrategy::FullGrid && pair_count < 1)
        throw ConfigError("pair_count must be >= 1 for sampled strategies");
}

void apply_override(HighwayConfig& cfg, const std::string& key, const std::string& value) {
    const std::string k = lower(trim(key));
    const std::string v = trim(value);
    if (k == "lambda") cfg.lambda = parse_double(k, v);
    else if (k == "t_n") cfg.t_n = parse_double(k, v);
    else if (k == "t_p") cfg.t_p = parse_double(k, v);
    else if (k == "epochs") cfg.epochs = static_cast<int>(parse_int(k, v));
    else if (k == "patience") cfg.patience = static_cast<int>(parse_int(k, v));
    else if (k == "max_t") cfg.max_t = static_cast<int>(parse_int(k, v));
    else if (k == "lr") cfg.lr = parse_double(k, v);
    else if (k == "dropout") cfg.dropout = parse_double(k, v);
    else if (k == "hidden") cfg.hidden = static_cast<int>(parse_int(k, v));
    else if (k == "weight_decay") cfg.weight_decay = parse_double(k, v);
    else if (k == "pos_weight") cfg.pos_weight = (lower(v) == "auto") ? 0.0 : parse_double(k, v);
    else if (k == "quota_per_class") cfg.quota_per_class = static_cast<int>(parse_int(k, v));
    else if (k == "mask_policy") {
        const std::string s = lower(v);
        if (s == "first") cfg.mask_policy = MaskPolicy::First;
        else if (s == "confident") cfg.mask_policy = MaskPolicy::Confident;
        else throw ConfigError("mask_policy must be 'first' or 'confident', got '" + v + "'");
    }
    else if (k == "literal_algorithm") cfg.literal_algorithm = parse_bool(k, v);
    else if (k == "proposal_cap") cfg.proposal_cap = static_cast<int>(parse_int(k, v));
    else if (k == "continue_training") cfg.continue_training = parse_bool(k, v);
    else if (k == "normalize_features") cfg.normalize_features = parse_bool(k, v);
    else if (k == "pair_strategy") cfg.pair_strategy = parse_pair_strategy(v);
    else if (k == "pair_count") cfg.pair_count = parse_int(k, v);
    else throw ConfigError("unknown config key '" + key + "'");
}

HighwayConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path.string());
    HighwayConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        try {
            apply_override(cfg, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

const char* mask_policy_name(MaskPolicy p) {
    return p == MaskPolicy::First ? "first" : "confident";
}

const char* pair_strategy_name(PairStrategy s) {
    switch (s) {
        case PairStrategy::FullGrid: return "full";
        case PairStrategy::Lead: return "lead";
        case PairStrategy::Random: return "random";
        case PairStrategy::Close: return "close";
        case PairStrategy::Middle: return "middle";
        case PairStrategy::Remote: return "remote";
    }
    return "full";
}

PairStrategy parse_pair_strategy(const std::string& s) {
    const std::string v = lower(trim(s));
    if (v == "full" || v == "full_grid" || v == "grid") return PairStrategy::FullGrid;
    if (v == "lead") return PairStrategy::Lead;
    if (v == "random") return PairStrategy::Random;
    if (v == "close") return PairStrategy::Close;
    if (v == "middle") return PairStrategy::Middle;
    if (v == "remote") return PairStrategy::Remote;
    throw ConfigError("unknown pair strategy '" + s + "'");
}

}  // namespace highway
