#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace emach {

// Number of field parameters plus pair couplings for M spins.
inline long pair_count(int num_spins) {
    return static_cast<long>(num_spins) * (num_spins - 1) / 2;
}
inline long param_count(int num_spins) { return num_spins + pair_count(num_spins); }

// Flat slot of coupling (j, k), j < k, in the parameter layout
// [h^0 .. h^{M-1}, J^{01}, J^{02}, .., J^{0,M-1}, J^{12}, ..].
// Throws std::invalid_argument unless 0 <= j < k < M.
long pair_index(int num_spins, int j, int k);

// Inverse of pair_index for slots in [M, L).
std::pair<int, int> pair_decode(int num_spins, long index);

// A configuration of M spins, each -1 or +1, packed one bit per spin
// (set bit means +1). Immutable value type, hashable, totally ordered
// by its packed words so ensembles have a canonical order.
class SpinConfiguration {
public:
    SpinConfiguration() = default;
    explicit SpinConfiguration(int num_spins)
        : num_spins_(num_spins), words_((num_spins + 63) / 64, 0) {}

    static SpinConfiguration from_signs(std::span<const int> signs);

    int num_spins() const { return num_spins_; }

    // Spin value, -1 or +1.
    int spin(int i) const {
        return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1 ? +1 : -1;
    }

    void set_spin(int i, int value);
    void flip(int i) { words_[static_cast<std::size_t>(i) >> 6] ^= 1ULL << (i & 63); }

    const std::vector<std::uint64_t>& words() const { return words_; }

    bool operator==(const SpinConfiguration& other) const = default;
    std::strong_ordering operator<=>(const SpinConfiguration& other) const;

private:
    int num_spins_ = 0;
    std::vector<std::uint64_t> words_;
};

struct SpinConfigurationHash {
    std::size_t operator()(const SpinConfiguration& config) const;
};

// Fields h^i and couplings J^{jk} in one flat vector of length
// L = M + M(M-1)/2, laid out as documented at pair_index.
struct ParameterVector {
    int num_spins = 0;
    Eigen::VectorXd w;

    ParameterVector() = default;
    ParameterVector(int num_spins_in, Eigen::VectorXd coeffs);

    static ParameterVector zero(int num_spins) {
        return {num_spins, Eigen::VectorXd::Zero(param_count(num_spins))};
    }

    long size() const { return w.size(); }

    double field(int i) const { return w[i]; }
    double& field(int i) { return w[i]; }
    double coupling(int j, int k) const { return w[pair_index(num_spins, j, k)]; }
    double& coupling(int j, int k) { return w[pair_index(num_spins, j, k)]; }

    // Dense symmetric coupling matrix with zero diagonal.
    Eigen::MatrixXd coupling_matrix() const;
};

}  // namespace emach
