#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lightloc {

// All randomness in the toolkit flows from one root seed, split per pipeline
// stage by hashing the stage name, so stages can be re-run independently and
// results stay byte-identical across platforms and worker counts. The
// distribution code below is hand-rolled on top of std::mt19937_64 because the
// standard <random> distributions are implementation-defined, which would
// break cross-platform reproducibility.

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seed for a named stage ("lightpaths", "scenario", "jitter", ...).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) {
    return splitmix64(root ^ fnv1a64(stage));
}

// Seed for one indexed draw inside a stage (per-sample independence; the
// result does not depend on how samples are distributed over workers).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view stage, std::uint64_t index) {
    return splitmix64(derive_seed(root, stage) ^ splitmix64(index + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // Uniform integer in [0, n). Rejection sampling keeps the result exactly
    // uniform and platform-independent.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * (~0ull / n);
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    int range(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Box-Muller without state carried between calls: two uniform draws per
    // normal keeps the draw count predictable.
    double normal(double mean, double sigma) {
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        return mean + sigma * z;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

    // k distinct indices from [0, n), in draw order.
    std::vector<int> sample_indices(int n, int k) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        std::vector<int> out;
        out.reserve(k);
        for (int i = 0; i < k; ++i) {
            std::size_t j = below(pool.size());
            out.push_back(pool[j]);
            pool[j] = pool.back();
            pool.pop_back();
        }
        return out;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace lightloc
