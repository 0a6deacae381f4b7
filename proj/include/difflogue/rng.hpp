#pragma once

#include <cstdint>
#include <vector>

namespace difflogue {

/**
 * Deterministic splitmix64 stream.
 *
 * Every random draw in the library flows through this generator so that
 * seeded runs replay bit-exactly and test oracles can re-derive any draw
 * sequence from the seed alone. Draw conventions (documented because
 * replay oracles depend on them):
 *   - next_below(n) is next() % n
 *   - next_double() maps the top 53 bits onto [0, 1)
 */
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30u)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27u)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31u);
    }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) { return next() % n; }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next() >> 11u) * (1.0 / 9007199254740992.0);
    }

    /// Categorical draw from non-negative weights summing to ~1.
    /// Falls back to the last index on floating-point underrun.
    std::size_t next_categorical(const std::vector<double>& probs) {
        double u = next_double();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

private:
    std::uint64_t state_;
};

/// Mixes a tag into a seed, producing an independent child stream.
/// derive(derive(s, a), b) defines the canonical per-(a,b) stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    SplitMix64 rng(seed ^ (tag * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
    return rng.next();
}

/// FNV-1a over bytes; used for vocabulary hashes and config fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace difflogue
