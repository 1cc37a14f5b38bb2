#pragma once
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace ips {

// Counter-based splittable randomness. One root seed expands into named
// streams (arrivals, labels, per-expert durations, ...); each stream is a
// stateless function of (key, counter), so adding a new stream or reordering
// unrelated code never perturbs the draws of existing streams.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xCBF29CE484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xFF;
        h *= 0x100000001B3ULL;
    }
    return h;
}

class RngStream {
public:
    RngStream() = default;
    RngStream(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0) {
        std::uint64_t h = fnv1a64(name);
        h = fnv1a64_u64(root_seed, h);
        h = fnv1a64_u64(index, h);
        key_ = splitmix64(h);
    }

    std::uint64_t next_u64() { return splitmix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

    // uniform in [0, 1)
    double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_exponential(double rate) { return -std::log1p(-next_u01()) / rate; }

    // inverse-CDF draw over the fixed index order of `probs`
    int next_categorical(std::span<const double> probs) {
        double u = next_u01();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    int next_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

// Deterministic derivation of per-replica seeds from a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(root ^ (a * 0xD1342543DE82EF95ULL)) ^ b);
}

}  // namespace ips
