#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace lsrl {

// Deterministic random stream, identical across platforms for a given
// (seed, label) pair.
//
// The stream key is an FNV-1a 64 hash of the seed's little-endian bytes
// followed by the label bytes; SplitMix64 expands the key into the four
// xoshiro256** state words, which generate all output. normal() uses
// Box-Muller with a cached spare.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view label);

    std::uint64_t next_u64();
    double uniform();                                // [0, 1)
    double normal(double mu = 0.0, double sigma = 1.0);
    std::uint64_t choice(std::uint64_t n);           // unbiased, 0..n-1
    std::vector<std::size_t> shuffled_indices(std::size_t n);  // Fisher-Yates

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[choice(i)]);
        }
    }

private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace lsrl
