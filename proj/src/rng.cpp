#include "pedflock/rng.hpp"

#include <numeric>
#include <stdexcept>

namespace pedflock {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h ^ seed;
}

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::mt19937_64& rng) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng() % (n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace pedflock
