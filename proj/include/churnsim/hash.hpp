#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "churnsim/rng.hpp"
#include "churnsim/types.hpp"

namespace churnsim {

/// 64-bit streaming digest over words. Not cryptographic; it only has to make
/// accidental transcript divergence visible.
class Hasher {
public:
    Hasher() = default;
    explicit Hasher(std::uint64_t init) : state_(init) {}

    Hasher& add(std::uint64_t word) {
        state_ = mix64(state_ ^ word) + 0x632be59bd9b4e019ULL;
        ++length_;
        return *this;
    }
    Hasher& add(NodeId id) { return add(id.value); }
    Hasher& add(Round r) { return add(std::uint64_t{r.index}); }
    Hasher& add(double x) { return add(std::bit_cast<std::uint64_t>(x)); }
    Hasher& add(bool b) { return add(std::uint64_t{b ? 1u : 0u}); }
    Hasher& add(std::string_view s) {
        add(std::uint64_t{s.size()});
        std::uint64_t word = 0;
        int filled = 0;
        for (const char c : s) {
            word = (word << 8) | static_cast<unsigned char>(c);
            if (++filled == 8) {
                add(word);
                word = 0;
                filled = 0;
            }
        }
        if (filled != 0) {
            add(word);
        }
        return *this;
    }

    std::uint64_t digest() const { return mix64(state_ ^ length_); }

private:
    std::uint64_t state_ = 0x243f6a8885a308d3ULL;
    std::uint64_t length_ = 0;
};

/// Order-independent accumulator for set digests maintained incrementally.
struct SetDigest {
    std::uint64_t sum = 0;
    std::uint64_t count = 0;

    void insert(std::uint64_t element_hash) {
        sum += mix64(element_hash);
        ++count;
    }
};

std::string to_hex(std::uint64_t value);
std::optional<std::uint64_t> from_hex(std::string_view text);

}  // namespace churnsim
