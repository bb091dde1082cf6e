#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace highway {

// Deterministic RNG. std::mt19937_64 output is pinned by the standard; the
// distribution mappings below are our own so that streams are identical on
// every platform (std::uniform_*_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1) with 53 random bits
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // uniform in [0, bound); rejection sampling, no modulo bias
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return r % bound;
    }

    int next_index(int bound) { return static_cast<int>(next_below(static_cast<std::uint64_t>(bound))); }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// Stateless mixer for deriving independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace highway
