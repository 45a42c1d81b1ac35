#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fim {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates consecutive seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_str(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic per-stream seeds: derive(seed, cascade id), derive(seed, epoch), ...
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return mix64(base ^ mix64(salt));
}

inline std::uint64_t derive_seed(std::uint64_t base, const std::string& salt) {
    return derive_seed(base, hash_str(salt));
}

// Uniform double in [0,1) with 53 random bits. Distribution code is our own so
// results do not depend on the standard library's implementation-defined
// distributions.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

// Index into a cumulative weight table; cdf must be non-decreasing with
// cdf.back() == total mass.
inline std::size_t sample_cdf(const std::vector<double>& cdf, double u) {
    const double target = u * cdf.back();
    std::size_t lo = 0, hi = cdf.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (cdf[mid] <= target)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo;
}

// First `count` elements of a partial Fisher-Yates shuffle of 0..n-1.
inline std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n,
                                                           std::size_t count) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    if (count > n)
        count = n;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + uniform_index(rng, n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

} // namespace fim
