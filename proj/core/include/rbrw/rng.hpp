#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rbrw {

// SplitMix64 finalizer. Used both as a seed scrambler and to derive
// independent per-replica streams from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Documented splitting contract: replica r of master seed s is seeded with
// splitmix64(s + (r+1) * GAMMA), GAMMA the SplitMix64 increment. Streams are
// reproducible individually, independent of how many replicas run.
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
    return splitmix64(master + (replica + 1) * 0x9E3779B97F4A7C15ULL);
}

// mt19937_64 with hand-rolled uniform/exponential draws. The standard pins
// the engine's output sequence, and we avoid std::*_distribution because its
// mapping to doubles is implementation-defined; this keeps trajectories
// bit-identical for a given seed on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; never returns 0, so log() below is safe.
    double uniform01_open() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform01_open()) / rate; }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        return static_cast<int>(engine_() % static_cast<std::uint64_t>(n));
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace rbrw
