#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace pedflock {

/// Fold a stage label into the run seed (FNV-1a) so one seed drives every
/// stochastic stage through independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

/// Fisher-Yates with explicit draws, stable across standard libraries.
template <class T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[rng() % i]);
    }
}

/// k distinct indices out of [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::mt19937_64& rng);

}  // namespace pedflock
