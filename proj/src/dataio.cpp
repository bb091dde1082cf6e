#include "highway/dataio.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "highway/errors.hpp"
#include "highway/rng.hpp"

namespace highway {

namespace {

using json = nlohmann::json;

[[noreturn]] void malformed(const std::filesystem::path& file, int lineno, const std::string& why) {
    throw InputError(file.string() + ":" + std::to_string(lineno) + ": " + why);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

}  // namespace

Dataset load_canonical(const std::filesystem::path& dir, bool normalize_features) {
    const auto nodes_path = dir / "nodes.tsv";
    const auto edges_path = dir / "edges.tsv";
    std::ifstream nodes_in(nodes_path);
    if (!nodes_in) throw InputError("cannot open " + nodes_path.string());

    std::vector<std::string> node_ids;
    std::vector<std::string> label_strings;
    std::vector<std::vector<std::pair<int, double>>> feats;
    std::unordered_map<std::string, int> index_of;

    std::string line;
    int lineno = 0;
    int max_feat = -1;
    while (std::getline(nodes_in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 3) malformed(nodes_path, lineno, "expected 3 tab-separated fields");
        const std::string& id = fields[0];
        if (id.empty()) malformed(nodes_path, lineno, "empty node id");
        if (index_of.count(id)) malformed(nodes_path, lineno, "duplicate node id '" + id + "'");
        index_of.emplace(id, static_cast<int>(node_ids.size()));
        node_ids.push_back(id);
        label_strings.push_back(fields[1]);
        if (fields[1].empty()) malformed(nodes_path, lineno, "empty label");

        std::vector<std::pair<int, double>> row;
        std::istringstream fs(fields[2]);
        std::string entry;
        int prev_idx = -1;
        while (fs >> entry) {
            auto colon = entry.find(':');
            if (colon == std::string::npos)
                malformed(nodes_path, lineno, "feature entry '" + entry + "' is not idx:val");
            int idx;
            double val;
            try {
                std::size_t p1 = 0, p2 = 0;
                idx = std::stoi(entry.substr(0, colon), &p1);
                val = std::stod(entry.substr(colon + 1), &p2);
                if (p1 != colon || p2 != entry.size() - colon - 1) throw std::invalid_argument(entry);
            } catch (const std::exception&) {
                malformed(nodes_path, lineno, "feature entry '" + entry + "' is not idx:val");
            }
            if (idx < 0) malformed(nodes_path, lineno, "negative feature index");
            if (idx <= prev_idx) malformed(nodes_path, lineno, "feature indices must ascend");
            prev_idx = idx;
            max_feat = std::max(max_feat, idx);
            row.emplace_back(idx, val);
        }
        feats.push_back(std::move(row));
    }
    const int n = static_cast<int>(node_ids.size());
    if (n == 0) throw InputError(nodes_path.string() + ": empty dataset");

    std::ifstream edges_in(edges_path);
    if (!edges_in) throw InputError("cannot open " + edges_path.string());
    std::vector<std::pair<int, int>> edges;
    lineno = 0;
    while (std::getline(edges_in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 2) malformed(edges_path, lineno, "expected 2 tab-separated fields");
        auto a = index_of.find(fields[0]);
        auto b = index_of.find(fields[1]);
        if (a == index_of.end()) malformed(edges_path, lineno, "unknown node id '" + fields[0] + "'");
        if (b == index_of.end()) malformed(edges_path, lineno, "unknown node id '" + fields[1] + "'");
        edges.emplace_back(a->second, b->second);  // duplicates/self dropped by from_edges
    }

    Dataset ds;
    ds.graph = SparseGraph::from_edges(n, edges);

    // label strings -> dense ids, sorted for a stable mapping
    std::map<std::string, int> label_ids;
    for (const auto& s : label_strings) label_ids.emplace(s, 0);
    if (label_ids.size() < 2) throw InputError(nodes_path.string() + ": fewer than 2 categories");
    ds.names.reserve(label_ids.size());
    for (auto& [name, id] : label_ids) {
        id = static_cast<int>(ds.names.size());
        ds.names.push_back(name);
    }
    ds.labels.resize(n);
    for (int i = 0; i < n; ++i) ds.labels[i] = label_ids[label_strings[i]];

    ds.features.rows = n;
    ds.features.cols = max_feat + 1;
    ds.features.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (auto& [idx, val] : feats[i]) sum += std::abs(val);
        const double scale = (normalize_features && sum > 0.0) ? 1.0 / sum : 1.0;
        for (auto& [idx, val] : feats[i]) {
            ds.features.col.push_back(idx);
            ds.features.val.push_back(val * scale);
        }
        ds.features.row_ptr[i + 1] = static_cast<int>(ds.features.col.size());
    }
    return ds;
}

ConvertStats convert_citation_files(const std::filesystem::path& content_path,
                                    const std::filesystem::path& cites_path,
                                    const std::filesystem::path& out_dir) {
    std::ifstream content_in(content_path);
    if (!content_in) throw InputError("cannot open " + content_path.string());

    std::vector<std::string> ids;
    std::vector<std::string> labels;
    std::vector<std::vector<std::pair<int, double>>> feats;
    std::unordered_map<std::string, int> index_of;

    std::string line;
    int lineno = 0;
    int width = -1;
    while (std::getline(content_in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() < 3) malformed(content_path, lineno, "expected <id> <features...> <label>");
        const int w = static_cast<int>(fields.size()) - 2;
        if (width < 0) width = w;
        else if (w != width)
            malformed(content_path, lineno,
                      "inconsistent feature width (" + std::to_string(w) + " vs " +
                          std::to_string(width) + ")");
        const std::string& id = fields.front();
        if (index_of.count(id)) malformed(content_path, lineno, "duplicate node id '" + id + "'");
        index_of.emplace(id, static_cast<int>(ids.size()));
        ids.push_back(id);
        labels.push_back(fields.back());

        std::vector<std::pair<int, double>> row;
        for (int k = 0; k < width; ++k) {
            double v;
            try {
                std::size_t pos = 0;
                v = std::stod(fields[k + 1], &pos);
                if (pos != fields[k + 1].size()) throw std::invalid_argument(fields[k + 1]);
            } catch (const std::exception&) {
                malformed(content_path, lineno, "feature value '" + fields[k + 1] + "' is not a number");
            }
            if (v != 0.0) row.emplace_back(k, v);
        }
        feats.push_back(std::move(row));
    }
    if (ids.empty()) throw InputError(content_path.string() + ": empty dataset");

    std::ifstream cites_in(cites_path);
    if (!cites_in) throw InputError("cannot open " + cites_path.string());
    ConvertStats stats;
    stats.nodes = static_cast<int>(ids.size());
    std::vector<std::pair<int, int>> edges;
    lineno = 0;
    while (std::getline(cites_in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 2) malformed(cites_path, lineno, "expected 2 tab-separated fields");
        auto a = index_of.find(fields[0]);
        auto b = index_of.find(fields[1]);
        if (a == index_of.end() || b == index_of.end()) {
            ++stats.dangling_dropped;
            continue;
        }
        if (a->second == b->second) {
            ++stats.duplicate_dropped;
            continue;
        }
        int u = std::min(a->second, b->second), v = std::max(a->second, b->second);
        edges.emplace_back(u, v);
    }
    std::sort(edges.begin(), edges.end());
    auto last = std::unique(edges.begin(), edges.end());
    stats.duplicate_dropped += static_cast<int>(edges.end() - last);
    edges.erase(last, edges.end());
    stats.edges = static_cast<long long>(edges.size());

    std::filesystem::create_directories(out_dir);
    std::ofstream nodes_out(out_dir / "nodes.tsv");
    if (!nodes_out) throw InputError("cannot write " + (out_dir / "nodes.tsv").string());
    std::ostringstream buf;
    buf.precision(17);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        buf.str("");
        buf << ids[i] << '\t' << labels[i] << '\t';
        bool first = true;
        for (auto& [idx, val] : feats[i]) {
            if (!first) buf << ' ';
            first = false;
            buf << idx << ':' << val;
        }
        nodes_out << buf.str() << '\n';
    }
    std::ofstream edges_out(out_dir / "edges.tsv");
    if (!edges_out) throw InputError("cannot write " + (out_dir / "edges.tsv").string());
    for (auto& [u, v] : edges) edges_out << ids[u] << '\t' << ids[v] << '\n';
    return stats;
}

DataSplit random_split(const Dataset& ds, std::uint64_t seed, int train_per_class,
                       int valid_per_class) {
    if (train_per_class < 1 || valid_per_class < 0)
        throw InputError("random_split: per-class quotas must be positive");

    std::vector<std::vector<int>> by_class(ds.num_classes());
    for (int i = 0; i < ds.num_nodes(); ++i) by_class[ds.labels[i]].push_back(i);
    for (int c = 0; c < ds.num_classes(); ++c) {
        const int need = train_per_class + valid_per_class;
        if (static_cast<int>(by_class[c].size()) < need)
            throw InputError("random_split: category '" + ds.names[c] + "' has " +
                             std::to_string(by_class[c].size()) + " nodes, needs " +
                             std::to_string(need));
    }

    DataSplit split;
    split.seed = seed;
    Rng rng(mix_seed(seed, 0x5eed));
    for (int c = 0; c < ds.num_classes(); ++c) {
        auto& pool = by_class[c];  // ascending node order, same for every seed
        rng.shuffle(pool);
        split.train.insert(split.train.end(), pool.begin(), pool.begin() + train_per_class);
        split.valid.insert(split.valid.end(), pool.begin() + train_per_class,
                           pool.begin() + train_per_class + valid_per_class);
        split.test.insert(split.test.end(), pool.begin() + train_per_class + valid_per_class,
                          pool.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.valid.begin(), split.valid.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

DataSplit standard_split(const Dataset& ds, const std::filesystem::path& split_file) {
    std::ifstream in(split_file);
    if (!in) throw InputError("cannot open split file: " + split_file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError(split_file.string() + ": invalid JSON: " + e.what());
    }

    auto read_set = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_array())
            throw InputError(split_file.string() + ": missing integer array '" + key + "'");
        std::vector<int> out;
        for (const auto& v : j[key]) {
            if (!v.is_number_integer())
                throw InputError(split_file.string() + ": non-integer entry in '" + key + "'");
            int idx = v.get<int>();
            if (idx < 0 || idx >= ds.num_nodes())
                throw InputError(split_file.string() + ": index " + std::to_string(idx) +
                                 " out of range in '" + key + "'");
            out.push_back(idx);
        }
        std::sort(out.begin(), out.end());
        if (std::adjacent_find(out.begin(), out.end()) != out.end())
            throw InputError(split_file.string() + ": duplicate index in '" + key + "'");
        return out;
    };

    DataSplit split;
    split.train = read_set("train");
    split.valid = read_set("valid");
    split.test = read_set("test");

    auto overlaps = [](const std::vector<int>& a, const std::vector<int>& b) {
        std::vector<int> tmp;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(tmp));
        return !tmp.empty();
    };
    if (overlaps(split.train, split.valid) || overlaps(split.train, split.test) ||
        overlaps(split.valid, split.test))
        throw InputError(split_file.string() + ": train/valid/test sets overlap");
    if (split.train.empty()) throw InputError(split_file.string() + ": empty training set");
    return split;
}

}  // namespace highway
