// Reproducible hierarchical random streams: a RandomStream is (seed, path),
// where the path encodes grid-cell and replicate indices. Identical (seed,
// path) pairs always materialize identical engines, independent of which
// worker thread consumes them.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace siglab {

// Finalizer of the splitmix64 generator; a high-quality 64-bit mixer.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed) {}
    RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path)
        : seed_(seed), path_(std::move(path)) {}

    std::uint64_t seed() const { return seed_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

    // Child stream with one more path component.
    RandomStream child(std::uint64_t index) const {
        std::vector<std::uint64_t> p = path_;
        p.push_back(index);
        return RandomStream(seed_, std::move(p));
    }

    // Collapse (seed, path...) into a single well-mixed 64-bit state.
    // Elements are absorbed as s = mix(s + p): adding the raw element keeps
    // siblings injective per level, while the asymmetry between the mixed
    // accumulator and the raw element avoids the cross-seed aliasing an
    // xor-of-two-hashes scheme would allow (swap or equal-value collisions).
    std::uint64_t state() const {
        std::uint64_t s = splitmix64_mix(seed_);
        for (std::uint64_t p : path_) s = splitmix64_mix(s + p);
        return s;
    }

    std::mt19937_64 engine() const { return std::mt19937_64(state()); }

private:
    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
};

}  // namespace siglab
