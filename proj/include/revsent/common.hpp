#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace revsent {

// Training math runs in `real`. Default is 32-bit; define REVSENT_REAL_DOUBLE
// to run the whole stack at 64-bit (used by the tight gradient-check builds).
#ifdef REVSENT_REAL_DOUBLE
using real = double;
#else
using real = float;
#endif

using Rng = std::mt19937_64;

struct RevsentError : std::runtime_error {
    explicit RevsentError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : RevsentError {
    using RevsentError::RevsentError;
};

struct ParseError : RevsentError {
    using RevsentError::RevsentError;
};

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Derive a stream-specific seed from the root seed so independent consumers
// (split shuffle, weight init, dropout, ...) never share a stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    std::uint64_t x = root ^ (0x9e3779b97f4a7c15ull * (stream + 1));
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27; x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

}  // namespace revsent
