#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bindbench {

// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Scene generation failed (placement or assignment search exhausted).
struct GenerationError : Error {
    using Error::Error;
};

// File / format problems: unreadable PNG, malformed manifest, bad config.
struct IoError : Error {
    using Error::Error;
};

// Prompt template problems: unknown template, unresolved placeholder.
struct TemplateError : Error {
    using Error::Error;
};

// Deterministic RNG used everywhere instead of <random> distributions,
// whose output is implementation-defined. splitmix64 core.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound). bound must be > 0.
    std::uint32_t next_below(std::uint32_t bound) {
        // Lemire's multiply-shift with rejection for exact uniformity.
        std::uint64_t x = next_u64() & 0xffffffffull;
        std::uint64_t m = x * bound;
        std::uint32_t l = static_cast<std::uint32_t>(m);
        if (l < bound) {
            std::uint32_t t = (0u - bound) % bound;
            while (l < t) {
                x = next_u64() & 0xffffffffull;
                m = x * bound;
                l = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    // Uniform integer in [lo, hi] inclusive.
    int next_int(int lo, int hi) {
        return lo + static_cast<int>(next_below(static_cast<std::uint32_t>(hi - lo + 1)));
    }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool next_bool(double p) { return next_double() < p; }

private:
    std::uint64_t state_;
};

// 64-bit FNV-1a, used to derive independent RNG streams from a base seed
// and a textual tag (task name, instance id, ...).
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
    Rng mix(base ^ fnv1a64(tag));
    return mix.next_u64();
}

std::string to_hex(const void* data, std::size_t len);

} // namespace bindbench
