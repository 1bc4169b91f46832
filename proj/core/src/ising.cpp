#include "emach/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace emach {

namespace {

void check_dimensions(const ParameterVector& params, int num_spins) {
    if (params.num_spins != num_spins) {
        throw std::invalid_argument("parameter/spin dimension mismatch: M=" +
                                    std::to_string(params.num_spins) + " vs " +
                                    std::to_string(num_spins));
    }
}

void check_enumerable(int num_spins, int cap) {
    if (num_spins > cap) {
        throw std::invalid_argument(
            "intractable enumeration: M=" + std::to_string(num_spins) +
            " exceeds the 2^M cap of " + std::to_string(cap));
    }
}

}  // namespace

double operator_sum(const ParameterVector& params, const SpinConfiguration& config) {
    check_dimensions(params, config.num_spins());
    const int m = params.num_spins;
    double total = 0.0;
    long slot = m;
    for (int j = 0; j < m; ++j) {
        const double sj = config.spin(j);
        total += params.w[j] * sj;
        for (int k = j + 1; k < m; ++k, ++slot) {
            total += params.w[slot] * sj * config.spin(k);
        }
    }
    return total;
}

Eigen::VectorXd operator_values(const ParameterVector& params, const Eigen::MatrixXd& spins) {
    check_dimensions(params, static_cast<int>(spins.cols()));
    const Eigen::VectorXd fields = params.w.head(params.num_spins);
    const Eigen::MatrixXd coupling = params.coupling_matrix();
    Eigen::VectorXd values = spins * fields;
    // sum_{j<k} J_jk s_j s_k = 1/2 s^T J s for symmetric zero-diagonal J.
    values.noalias() += 0.5 * ((spins * coupling).array() * spins.array()).rowwise().sum().matrix();
    return values;
}

Eigen::VectorXd operator_values(const ParameterVector& params,
                                const ObservationEnsemble& ensemble) {
    return operator_values(params, ensemble.spin_matrix());
}

Eigen::VectorXd weighted_moments(const ObservationEnsemble& ensemble,
                                 const Eigen::VectorXd& weights) {
    const auto& spins = ensemble.spin_matrix();
    const int m = ensemble.num_spins();
    const Eigen::MatrixXd weighted = spins.array().colwise() * weights.array();
    const Eigen::MatrixXd pair_sums = spins.transpose() * weighted;  // M x M

    Eigen::VectorXd moments(param_count(m));
    moments.head(m) = weighted.colwise().sum();
    long slot = m;
    for (int j = 0; j < m; ++j) {
        for (int k = j + 1; k < m; ++k, ++slot) {
            moments[slot] = pair_sums(j, k);
        }
    }
    return moments;
}

Eigen::VectorXd observed_moments(const ObservationEnsemble& ensemble) {
    return weighted_moments(ensemble, ensemble.frequencies());
}

double mean_energy_observed(const ParameterVector& params,
                            const ObservationEnsemble& ensemble) {
    check_dimensions(params, ensemble.num_spins());
    return -ensemble.frequencies().dot(operator_values(params, ensemble));
}

double log_partition_exact(const ParameterVector& params, int enumeration_cap) {
    const int m = params.num_spins;
    check_enumerable(m, enumeration_cap);

    // Walk configurations in binary-reflected Gray order so consecutive
    // states differ by one spin; each step costs O(M) for the local field.
    std::vector<double> signs(m, -1.0);
    const Eigen::MatrixXd coupling = params.coupling_matrix();

    double value = 0.0;  // w.O of the all-minus state
    for (int i = 0; i < m; ++i) value -= params.w[i];
    for (int j = 0; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) value += coupling(j, k);
    }

    double shift = value;
    double sum = 1.0;  // exp(value - shift)
    const std::uint64_t total = 1ULL << m;
    for (std::uint64_t t = 1; t < total; ++t) {
        const int i = std::countr_zero(t);
        double local = params.w[i];
        for (int k = 0; k < m; ++k) local += coupling(i, k) * signs[k];
        value -= 2.0 * signs[i] * local;
        signs[i] = -signs[i];

        if (value > shift) {
            sum = sum * std::exp(shift - value) + 1.0;
            shift = value;
        } else {
            sum += std::exp(value - shift);
        }
    }
    return shift + std::log(sum);
}

ExactModelStats exact_model_stats(const ParameterVector& params, int enumeration_cap) {
    const int m = params.num_spins;
    check_enumerable(m, enumeration_cap);
    const long num_params = param_count(m);
    const std::uint64_t total = 1ULL << m;
    const int block_rows = static_cast<int>(std::min<std::uint64_t>(total, 1ULL << 13));

    Eigen::MatrixXd block(block_rows, m);
    double shift = -std::numeric_limits<double>::infinity();
    double weight_sum = 0.0;
    Eigen::VectorXd field_acc = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd pair_acc = Eigen::MatrixXd::Zero(m, m);

    for (std::uint64_t base = 0; base < total; base += block_rows) {
        const int rows = static_cast<int>(std::min<std::uint64_t>(block_rows, total - base));
        for (int r = 0; r < rows; ++r) {
            const std::uint64_t bits = base + r;
            for (int i = 0; i < m; ++i) {
                block(r, i) = (bits >> i) & 1 ? 1.0 : -1.0;
            }
        }
        const auto view = block.topRows(rows);
        const Eigen::VectorXd values = operator_values(params, view);

        const double block_max = values.maxCoeff();
        if (block_max > shift) {
            const double rescale = std::exp(shift - block_max);
            weight_sum *= rescale;
            field_acc *= rescale;
            pair_acc *= rescale;
            shift = block_max;
        }
        const Eigen::VectorXd weights = (values.array() - shift).exp();
        weight_sum += weights.sum();
        const Eigen::MatrixXd weighted = view.array().colwise() * weights.array();
        field_acc.noalias() += weighted.colwise().sum().transpose();
        pair_acc.noalias() += view.transpose() * weighted;
    }

    ExactModelStats stats;
    stats.log_partition = shift + std::log(weight_sum);
    stats.moments.resize(num_params);
    stats.moments.head(m) = field_acc / weight_sum;
    long slot = m;
    for (int j = 0; j < m; ++j) {
        for (int k = j + 1; k < m; ++k, ++slot) {
            stats.moments[slot] = pair_acc(j, k) / weight_sum;
        }
    }
    return stats;
}

TruncatedLogPartition log_partition_truncated(const ParameterVector& params, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    TruncatedLogPartition result;
    result.value = params.num_spins * std::log(2.0);
    for (long i = 0; i < params.w.size(); ++i) {
        const double scaled = epsilon * params.w[i];
        result.value += std::log(std::cosh(scaled));
        result.max_scaled_param = std::max(result.max_scaled_param, std::abs(scaled));
    }
    result.guard_exceeded = result.max_scaled_param >= 1.0;
    return result;
}

}  // namespace emach
