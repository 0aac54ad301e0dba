#include "boolperc/rng.hpp"

namespace boolperc {

std::uint64_t hash_ints(const std::int64_t* v, int count) {
    std::uint64_t h = 0x243f6a8885a308d3ULL ^ static_cast<std::uint64_t>(count);
    for (int i = 0; i < count; ++i) {
        h = mix64(h + static_cast<std::uint64_t>(v[i]) * 0x9e3779b97f4a7c15ULL + 0x13198a2e03707344ULL);
    }
    return h;
}

}  // namespace boolperc
