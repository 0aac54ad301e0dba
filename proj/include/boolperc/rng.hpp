// Counter-based random streams. A stream is identified by
// (master seed, purpose tag, index) and never depends on draws made by
// other streams, so replicas and cells can be generated in any order.
#pragma once

#include <cstdint>
#include <limits>

namespace boolperc {

enum class StreamTag : std::uint64_t {
    Sample = 1,
    Replica = 2,
    Encoded = 3,
    Sprinkle = 4,
    Insertion = 5,
    Exploration = 6,
    Abstract = 7,
    Pilot = 8,
    Conditioning = 9,
    Oracle = 10,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t parent, StreamTag tag, std::uint64_t index) {
    std::uint64_t k = mix64(parent ^ 0x6a09e667f3bcc909ULL);
    k = mix64(k + static_cast<std::uint64_t>(tag) * 0x9e3779b97f4a7c15ULL);
    return mix64(k ^ mix64(index + 0xbb67ae8584caa73bULL));
}

// Satisfies UniformRandomBitGenerator.
class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t master, StreamTag tag, std::uint64_t index)
        : key_(stream_key(master, tag, index)), state_(key_) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Top k bits of one draw, 1 <= k <= 64.
    std::uint64_t bits(int k) { return k >= 64 ? (*this)() : (*this)() >> (64 - k); }

    // Child stream; deterministic function of this stream's identity only.
    Stream child(StreamTag tag, std::uint64_t index) const { return Stream(key_, tag, index, 0); }

    std::uint64_t key() const { return key_; }

private:
    Stream(std::uint64_t parent_key, StreamTag tag, std::uint64_t index, int)
        : key_(stream_key(parent_key, tag, index)), state_(key_) {}

    std::uint64_t key_;
    std::uint64_t state_;
};

// Hash of a small integer vector, used to key per-cell or per-site streams.
std::uint64_t hash_ints(const std::int64_t* v, int count);

}  // namespace boolperc
