#include "emach/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "emach/rng.hpp"

namespace emach {

ParameterVector draw_true_parameters(const GroundTruthSpec& spec) {
    if (spec.num_spins < 1) throw std::invalid_argument("ground truth: M must be >= 1");
    if (!(spec.field_std >= 0.0) || !(spec.coupling_strength >= 0.0)) {
        throw std::invalid_argument("ground truth: stds must be finite and >= 0");
    }
    Rng rng(spec.seed);
    const int m = spec.num_spins;
    const double coupling_std = spec.coupling_strength / std::sqrt(static_cast<double>(m));
    Eigen::VectorXd w(param_count(m));
    for (int i = 0; i < m; ++i) w[i] = rng.normal(0.0, spec.field_std);
    for (long slot = m; slot < w.size(); ++slot) w[slot] = rng.normal(0.0, coupling_std);
    return {m, std::move(w)};
}

ObservationEnsemble sample_exact(const ParameterVector& params, const SamplerConfig& config) {
    const int m = params.num_spins;
    if (m > config.enumeration_cap) {
        throw std::invalid_argument("intractable enumeration: M=" + std::to_string(m) +
                                    " exceeds the 2^M cap of " +
                                    std::to_string(config.enumeration_cap));
    }
    if (config.num_samples < 1) throw std::invalid_argument("sampler: N must be >= 1");

    // Cumulative distribution over all 2^M configurations, shifted for
    // overflow safety. Configuration index bit i encodes spin i (+1 if set).
    const std::uint64_t total = 1ULL << m;
    const Eigen::MatrixXd coupling = params.coupling_matrix();
    std::vector<double> cumulative(total);
    {
        std::vector<double> signs(m, -1.0);
        double value = -params.w.head(m).sum();
        for (int j = 0; j < m; ++j) {
            for (int k = j + 1; k < m; ++k) value += coupling(j, k);
        }
        // Gray-code walk; configuration bits of step t are t ^ (t >> 1).
        std::vector<double> values(total);
        values[0] = value;
        double max_value = value;
        for (std::uint64_t t = 1; t < total; ++t) {
            const int i = std::countr_zero(t);
            double local = params.w[i];
            for (int k = 0; k < m; ++k) local += coupling(i, k) * signs[k];
            value -= 2.0 * signs[i] * local;
            signs[i] = -signs[i];
            values[t ^ (t >> 1)] = value;
            max_value = std::max(max_value, value);
        }
        double running = 0.0;
        for (std::uint64_t c = 0; c < total; ++c) {
            running += std::exp(values[c] - max_value);
            cumulative[c] = running;
        }
    }
    const double norm = cumulative.back();

    Rng rng(config.seed);
    std::unordered_map<std::uint64_t, long> histogram;
    for (long n = 0; n < config.num_samples; ++n) {
        const double u = rng.uniform() * norm;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const std::uint64_t index =
            std::min<std::uint64_t>(it - cumulative.begin(), total - 1);
        ++histogram[index];
    }

    std::vector<std::pair<SpinConfiguration, long>> counted;
    counted.reserve(histogram.size());
    for (const auto& [bits, count] : histogram) {
        SpinConfiguration spin_config(m);
        for (int i = 0; i < m; ++i) {
            if ((bits >> i) & 1) spin_config.set_spin(i, +1);
        }
        counted.emplace_back(std::move(spin_config), count);
    }
    return ObservationEnsemble(m, std::move(counted));
}

double flip_delta(const ParameterVector& params, std::span<const double> signs, int site) {
    const int m = params.num_spins;
    double local = params.w[site];
    for (int k = 0; k < site; ++k) local += params.w[pair_index(m, k, site)] * signs[k];
    for (int k = site + 1; k < m; ++k) local += params.w[pair_index(m, site, k)] * signs[k];
    return -2.0 * signs[site] * local;
}

ObservationEnsemble sample_metropolis(const ParameterVector& params,
                                      const SamplerConfig& config) {
    if (config.num_samples < 1) throw std::invalid_argument("sampler: N must be >= 1");
    const int m = params.num_spins;
    const Eigen::MatrixXd coupling = params.coupling_matrix();
    Rng rng(config.seed);

    std::vector<double> signs(m);
    for (int i = 0; i < m; ++i) signs[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;

    // Local fields theta_i = h_i + sum_k J_ik s_k, updated incrementally on
    // accepted flips and rebuilt periodically to cancel float drift.
    Eigen::VectorXd theta(m);
    const auto rebuild_theta = [&] {
        for (int i = 0; i < m; ++i) {
            double t = params.w[i];
            for (int k = 0; k < m; ++k) t += coupling(i, k) * signs[k];
            theta[i] = t;
        }
    };
    rebuild_theta();

    long sweeps_done = 0;
    const auto sweep = [&] {
        for (int p = 0; p < m; ++p) {
            const int i = static_cast<int>(rng.below(m));
            const double delta = -2.0 * signs[i] * theta[i];
            if (delta >= 0.0 || rng.uniform() < std::exp(delta)) {
                signs[i] = -signs[i];
                const double step = 2.0 * signs[i];
                for (int k = 0; k < m; ++k) theta[k] += step * coupling(k, i);
            }
        }
        if (++sweeps_done % 4096 == 0) rebuild_theta();
    };

    for (int s = 0; s < config.burn_in_sweeps; ++s) sweep();

    std::unordered_map<SpinConfiguration, long, SpinConfigurationHash> histogram;
    const int gap = std::max(1, config.thinning_sweeps);
    for (long n = 0; n < config.num_samples; ++n) {
        if (n > 0) {
            for (int s = 0; s < gap; ++s) sweep();
        }
        SpinConfiguration spin_config(m);
        for (int i = 0; i < m; ++i) {
            if (signs[i] > 0) spin_config.set_spin(i, +1);
        }
        ++histogram[spin_config];
    }

    std::vector<std::pair<SpinConfiguration, long>> counted(histogram.begin(),
                                                            histogram.end());
    return ObservationEnsemble(m, std::move(counted));
}

ObservationEnsemble sample(const ParameterVector& params, const SamplerConfig& config) {
    return config.method == SampleMethod::kExactEnumeration ? sample_exact(params, config)
                                                            : sample_metropolis(params, config);
}

}  // namespace emach
