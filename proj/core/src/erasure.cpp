#include "emach/erasure.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "emach/parallel.hpp"
#include "emach/rng.hpp"

namespace emach {

namespace {

Eigen::VectorXd reweight_log_domain(const ObservationEnsemble& ensemble,
                                    const Eigen::VectorXd& op_values, double epsilon) {
    Eigen::VectorXd log_weights =
        ensemble.log_frequencies() + (epsilon - 1.0) * op_values;
    const double shift = log_weights.maxCoeff();
    Eigen::VectorXd weights = (log_weights.array() - shift).exp();
    const double total = weights.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw std::runtime_error("reweight: weights are not normalizable");
    }
    return weights / total;
}

ParameterVector random_init(int num_spins, const EmConfig& config) {
    Rng rng(config.seed);
    Eigen::VectorXd w(param_count(num_spins));
    for (long i = 0; i < w.size(); ++i) w[i] = rng.normal(0.0, config.init_scale);
    return {num_spins, std::move(w)};
}

}  // namespace

ReweightedEnsemble reweight(const ObservationEnsemble& ensemble,
                            const ParameterVector& params, double epsilon) {
    if (ensemble.unique_count() == 0) throw std::invalid_argument("reweight: empty ensemble");
    return {ensemble, reweight_log_domain(ensemble, operator_values(params, ensemble), epsilon)};
}

Eigen::VectorXd reweighted_moments(const ReweightedEnsemble& reweighted) {
    return weighted_moments(reweighted.base, reweighted.weights);
}

ParameterVector em_step(const ParameterVector& params, const ObservationEnsemble& ensemble,
                        const EmConfig& config) {
    const Eigen::VectorXd weights =
        reweight_log_domain(ensemble, operator_values(params, ensemble), config.epsilon);
    const Eigen::VectorXd moments = weighted_moments(ensemble, weights);
    Eigen::VectorXd next =
        params.w + config.learning_rate * (moments - config.epsilon * params.w);
    if (!next.allFinite()) {
        throw std::runtime_error("em_step: non-finite update (learning rate too large?)");
    }
    return {params.num_spins, std::move(next)};
}

FitReport fit(const ObservationEnsemble& ensemble, const EmConfig& config) {
    if (!(config.epsilon > 0.0) || !(config.learning_rate > 0.0) || !(config.tol > 0.0)) {
        throw std::invalid_argument("fit: epsilon, learning rate, and tol must be positive");
    }
    const auto start = std::chrono::steady_clock::now();
    const int m = ensemble.num_spins();
    const Eigen::VectorXd observed = observed_moments(ensemble);

    FitReport report;
    report.method = "em";
    report.epsilon = config.epsilon;
    report.seed = config.seed;
    report.params = random_init(m, config);
    report.energy_trajectory.reserve(std::min<long>(config.max_iters, 1 << 16));

    Eigen::VectorXd w = report.params.w;
    const double alpha = config.learning_rate;
    const double eps = config.epsilon;

    for (long iter = 0; iter < config.max_iters; ++iter) {
        const Eigen::VectorXd values =
            operator_values(ParameterVector{m, w}, ensemble);
        const Eigen::VectorXd weights = reweight_log_domain(ensemble, values, eps);
        const Eigen::VectorXd moments = weighted_moments(ensemble, weights);

        const Eigen::VectorXd residual = moments - eps * w;
        w += alpha * residual;
        ++report.iterations;

        const double max_w = w.cwiseAbs().maxCoeff();
        report.guard_exceeded |= eps * max_w >= 1.0;
        report.energy_trajectory.push_back(-w.dot(observed));
        report.final_residual = residual.cwiseAbs().maxCoeff();

        if (!w.allFinite() || max_w > config.divergence_bound) {
            report.diverged = true;
            break;
        }
        if (report.final_residual < config.tol) {
            report.converged = true;
            break;
        }
    }

    if (!w.allFinite()) {
        // Return the last finite state for inspection.
        w = w.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; });
    }
    report.params = ParameterVector{m, w};
    report.final_energy = -w.dot(observed);
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

EpsilonScanReport scan_epsilon(const ObservationEnsemble& ensemble,
                               const std::vector<double>& grid, const EmConfig& base_config) {
    if (grid.empty()) throw std::invalid_argument("scan: empty epsilon grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("scan: epsilon values must be > 0");
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
            if (grid[i] == grid[j]) throw std::invalid_argument("scan: duplicate epsilon");
        }
    }

    EpsilonScanReport report;
    report.grid = grid;
    report.fits.resize(grid.size());

    Rng seeder(base_config.seed);
    parallel_for(grid.size(), [&](std::size_t i) {
        EmConfig config = base_config;
        config.epsilon = grid[i];
        config.seed = seeder.child(i).seed();
        report.fits[i] = fit(ensemble, config);
    });

    // Select the maximal final <E>_f over usable fits; ties within 1e-9 go
    // to the smaller epsilon (scan in grid order with a strict improvement
    // test does exactly that for ascending grids; for general grids we pick
    // by value, then by epsilon).
    int best = -1;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& candidate = report.fits[i];
        if (candidate.diverged || !std::isfinite(candidate.final_energy)) continue;
        if (best < 0) {
            best = static_cast<int>(i);
            continue;
        }
        const auto& incumbent = report.fits[best];
        const double diff = candidate.final_energy - incumbent.final_energy;
        if (diff > 1e-9 || (std::abs(diff) <= 1e-9 && grid[i] < grid[best])) {
            best = static_cast<int>(i);
        }
    }
    if (best < 0) throw std::runtime_error("scan: all fits diverged");
    report.selected_index = best;
    report.selected_epsilon = grid[best];

    const double top = report.fits[best].final_energy;
    const double threshold = top - 0.01 * std::abs(top);
    const auto in_plateau = [&](int i) {
        return !report.fits[i].diverged && std::isfinite(report.fits[i].final_energy) &&
               report.fits[i].final_energy >= threshold;
    };
    int lo = best, hi = best;
    while (lo > 0 && in_plateau(lo - 1)) --lo;
    while (hi + 1 < static_cast<int>(grid.size()) && in_plateau(hi + 1)) ++hi;
    report.plateau_begin = lo;
    report.plateau_end = hi + 1;
    report.plateau_width = grid[hi] - grid[lo];
    return report;
}

std::vector<double> epsilon_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(lo > 0.0) || hi < lo) {
        throw std::invalid_argument("epsilon grid: need 0 < lo <= hi and step > 0");
    }
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        const double value = lo + i * step;
        if (value > hi + 1e-12) break;
        grid.push_back(value);
    }
    return grid;
}

std::vector<double> default_epsilon_grid() { return epsilon_grid(0.05, 1.0, 0.05); }

}  // namespace emach
