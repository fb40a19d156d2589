#pragma once

#include <cstdint>

namespace weakmeter {

// SplitMix64 counter generator. The integer sequence is fully specified, so
// sampled runs reproduce bit for bit on any platform and compiler; the
// standard library distributions make no such promise.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(scramble(seed ^ scramble(stream + kGolden))) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += kGolden);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 significant bits.
    double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // Stable per-point seed for index k of a sweep run with a base seed. The
    // scramble keeps derived states from landing on shifted copies of the
    // same counter sequence.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
        return scramble(seed + 0xD1B54A32D192ED03ull * (index + 1));
    }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    static std::uint64_t scramble(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace weakmeter
