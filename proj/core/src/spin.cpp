#include "emach/spin.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace emach {

long pair_index(int num_spins, int j, int k) {
    if (j < 0 || j >= k || k >= num_spins) {
        throw std::invalid_argument("pair_index: need 0 <= j < k < M, got j=" +
                                    std::to_string(j) + " k=" + std::to_string(k) +
                                    " M=" + std::to_string(num_spins));
    }
    // Pairs with first index j occupy a block of (M-1-j) slots.
    const long lj = j, lk = k, m = num_spins;
    return m + lj * (2 * m - lj - 1) / 2 + (lk - lj - 1);
}

std::pair<int, int> pair_decode(int num_spins, long index) {
    const long m = num_spins;
    if (index < m || index >= param_count(num_spins)) {
        throw std::invalid_argument("pair_decode: slot " + std::to_string(index) +
                                    " is not a coupling slot");
    }
    long offset = index - m;
    int j = 0;
    while (offset >= m - 1 - j) {
        offset -= m - 1 - j;
        ++j;
    }
    return {j, j + 1 + static_cast<int>(offset)};
}

SpinConfiguration SpinConfiguration::from_signs(std::span<const int> signs) {
    SpinConfiguration config(static_cast<int>(signs.size()));
    for (int i = 0; i < config.num_spins_; ++i) config.set_spin(i, signs[i]);
    return config;
}

void SpinConfiguration::set_spin(int i, int value) {
    if (value != -1 && value != +1) {
        throw std::invalid_argument("spin value must be -1 or +1");
    }
    const std::uint64_t mask = 1ULL << (i & 63);
    if (value > 0) {
        words_[static_cast<std::size_t>(i) >> 6] |= mask;
    } else {
        words_[static_cast<std::size_t>(i) >> 6] &= ~mask;
    }
}

std::strong_ordering SpinConfiguration::operator<=>(const SpinConfiguration& other) const {
    if (auto c = num_spins_ <=> other.num_spins_; c != 0) return c;
    for (std::size_t i = 0; i < words_.size(); ++i) {
        if (auto c = words_[i] <=> other.words_[i]; c != 0) return c;
    }
    return std::strong_ordering::equal;
}

std::size_t SpinConfigurationHash::operator()(const SpinConfiguration& config) const {
    // splitmix64-style mix over the packed words.
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(config.num_spins());
    for (std::uint64_t word : config.words()) {
        std::uint64_t z = h ^ word;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        h = z ^ (z >> 31);
    }
    return static_cast<std::size_t>(h);
}

ParameterVector::ParameterVector(int num_spins_in, Eigen::VectorXd coeffs)
    : num_spins(num_spins_in), w(std::move(coeffs)) {
    if (w.size() != param_count(num_spins)) {
        throw std::invalid_argument("ParameterVector: expected length " +
                                    std::to_string(param_count(num_spins)) + ", got " +
                                    std::to_string(w.size()));
    }
    if (!w.allFinite()) {
        throw std::invalid_argument("ParameterVector: entries must be finite");
    }
}

Eigen::MatrixXd ParameterVector::coupling_matrix() const {
    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(num_spins, num_spins);
    long slot = num_spins;
    for (int j = 0; j < num_spins; ++j) {
        for (int k = j + 1; k < num_spins; ++k, ++slot) {
            coupling(j, k) = w[slot];
            coupling(k, j) = w[slot];
        }
    }
    return coupling;
}

}  // namespace emach
