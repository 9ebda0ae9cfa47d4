#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace churnsim {

// Stream domains keep the randomness of different consumers disjoint.
enum class Domain : std::uint64_t {
    Node = 1,
    Adversary = 2,
    Topology = 3,
    InitialTopology = 4,
    Input = 5,
    Spectral = 6,
    Test = 7,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator: output i is mix64(key + i * golden). A stream is
/// fully determined by its key, so child streams derived from
/// (seed, domain, a, b) do not depend on the order in which they are used.
class Stream {
public:
    using result_type = std::uint64_t;

    constexpr explicit Stream(std::uint64_t key) : key_(key) {}

    static constexpr Stream derive(std::uint64_t seed, Domain domain, std::uint64_t a = 0,
                                   std::uint64_t b = 0) {
        std::uint64_t k = mix64(seed);
        k = mix64(k ^ static_cast<std::uint64_t>(domain));
        k = mix64(k ^ a);
        k = mix64(k ^ b);
        return Stream(k);
    }

    constexpr Stream child(std::uint64_t tag) const { return Stream(mix64(key_ ^ mix64(tag))); }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++); }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) {
            return 0;
        }
        for (;;) {
            const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
            const auto low = static_cast<std::uint64_t>(m);
            if (low >= (-bound) % bound) {
                return static_cast<std::uint64_t>(m >> 64);
            }
        }
    }

    /// Uniform double in (0, 1], 53-bit resolution.
    double uniform_open_closed() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli_half() { return ((*this)() >> 63) != 0; }

    constexpr std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

template <typename T>
void shuffle(std::span<T> items, Stream& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace churnsim
