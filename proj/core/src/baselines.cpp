#include "emach/baselines.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "emach/parallel.hpp"

namespace emach {

namespace {

// ln(2 cosh t) without overflow.
inline double log_two_cosh(double t) {
    const double a = std::abs(t);
    return a + std::log1p(std::exp(-2.0 * a));
}

struct AscentResult {
    Eigen::VectorXd x;
    long iterations = 0;
    bool converged = false;
};

// Gradient ascent for a concave objective, robust to the float resolution
// of the objective near the optimum. Two phases:
//  - While improvements are resolvable, backtracking line search (halve on
//    decrease, grow on success).
//  - Once no step yields a resolvable improvement, freeze a halved step and
//    iterate plain gradient steps; concavity makes this converge, and the
//    step halves again whenever the gradient norm starts growing instead.
// Stops when the gradient max-norm drops below tol.
template <typename Objective, typename Gradient>
AscentResult concave_ascent(Eigen::VectorXd x0, Objective&& objective_fn,
                            Gradient&& gradient_fn, double initial_step, long max_iters,
                            double tol) {
    AscentResult result;
    result.x = std::move(x0);
    double objective = objective_fn(result.x);
    double step = initial_step;
    const double step_cap = initial_step * 64.0;
    bool fine_phase = false;
    double gradient_reference = std::numeric_limits<double>::infinity();

    for (long iter = 0; iter < max_iters; ++iter) {
        const Eigen::VectorXd gradient = gradient_fn(result.x);
        const double gradient_norm = gradient.cwiseAbs().maxCoeff();
        if (gradient_norm < tol) {
            result.converged = true;
            break;
        }
        ++result.iterations;

        if (!fine_phase) {
            const double dust = 1e-12 * std::max(1.0, std::abs(objective));
            const double entry_step = step;
            bool moved = false;
            while (step > 1e-14) {
                Eigen::VectorXd trial = result.x + step * gradient;
                const double trial_objective = objective_fn(trial);
                if (trial_objective > objective + dust) {
                    result.x = std::move(trial);
                    objective = trial_objective;
                    step = std::min(step * 1.5, step_cap);
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) {
                fine_phase = true;
                step = 0.5 * entry_step;
                gradient_reference = gradient_norm;
            }
            continue;
        }

        result.x += step * gradient;
        if (gradient_norm > 2.0 * gradient_reference) {
            step *= 0.5;
            gradient_reference = gradient_norm;
        } else {
            gradient_reference = std::min(gradient_reference, gradient_norm);
        }
    }
    return result;
}

}  // namespace

ParameterVector hopfield_solution(const ObservationEnsemble& ensemble) {
    return {ensemble.num_spins(), observed_moments(ensemble)};
}

double mle_log_likelihood(const ParameterVector& params, const ObservationEnsemble& ensemble,
                          int enumeration_cap) {
    return params.w.dot(observed_moments(ensemble)) -
           log_partition_exact(params, enumeration_cap);
}

Eigen::VectorXd mle_gradient(const ParameterVector& params, const ObservationEnsemble& ensemble,
                             int enumeration_cap) {
    return observed_moments(ensemble) - exact_model_stats(params, enumeration_cap).moments;
}

FitReport mle_fit(const ObservationEnsemble& ensemble, const MleConfig& config) {
    if (!(config.learning_rate > 0.0) || !(config.tol > 0.0)) {
        throw std::invalid_argument("mle: learning rate and tol must be positive");
    }
    const auto start = std::chrono::steady_clock::now();
    const int m = ensemble.num_spins();
    const Eigen::VectorXd observed = observed_moments(ensemble);

    // The backtracking candidates only need ln Z (Gray-code pass); the full
    // moments pass runs once per accepted gradient evaluation.
    auto ascent = concave_ascent(
        Eigen::VectorXd::Zero(param_count(m)),
        [&](const Eigen::VectorXd& w) {
            return w.dot(observed) - log_partition_exact({m, w}, config.enumeration_cap);
        },
        [&](const Eigen::VectorXd& w) -> Eigen::VectorXd {
            return observed - exact_model_stats({m, w}, config.enumeration_cap).moments;
        },
        config.learning_rate, config.max_iters, config.tol);

    FitReport report;
    report.method = "mle";
    report.iterations = ascent.iterations;
    report.converged = ascent.converged;
    report.params = ParameterVector{m, std::move(ascent.x)};
    report.final_residual =
        mle_gradient(report.params, ensemble, config.enumeration_cap).cwiseAbs().maxCoeff();
    report.final_energy = -report.params.w.dot(observed);
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

double ple_spin_objective(const ObservationEnsemble& ensemble, int spin,
                          const Eigen::VectorXd& spin_params) {
    const auto& spins = ensemble.spin_matrix();
    const auto& freq = ensemble.frequencies();
    // theta_u = h_i + sum_{k != i} J_ik s_uk; the s_ui * params[i] term from
    // the plain product is replaced by params[i] itself.
    Eigen::VectorXd theta = spins * spin_params;
    theta.array() += spin_params[spin] * (1.0 - spins.col(spin).array());
    double objective = 0.0;
    for (int u = 0; u < ensemble.unique_count(); ++u) {
        objective += freq[u] * (spins(u, spin) * theta[u] - log_two_cosh(theta[u]));
    }
    return objective;
}

Eigen::VectorXd ple_spin_gradient(const ObservationEnsemble& ensemble, int spin,
                                  const Eigen::VectorXd& spin_params) {
    const auto& spins = ensemble.spin_matrix();
    const auto& freq = ensemble.frequencies();
    Eigen::VectorXd theta = spins * spin_params;
    theta.array() += spin_params[spin] * (1.0 - spins.col(spin).array());
    const Eigen::VectorXd residual =
        freq.array() * (spins.col(spin).array() - theta.array().tanh());
    Eigen::VectorXd gradient = spins.transpose() * residual;
    gradient[spin] = residual.sum();  // d/dh_i
    return gradient;
}

FitReport ple_fit(const ObservationEnsemble& ensemble, const PleConfig& config) {
    if (!(config.learning_rate > 0.0) || !(config.tol > 0.0)) {
        throw std::invalid_argument("ple: learning rate and tol must be positive");
    }
    const auto start = std::chrono::steady_clock::now();
    const int m = ensemble.num_spins();

    std::vector<Eigen::VectorXd> per_spin(m);
    std::vector<long> iterations(m, 0);
    std::vector<char> converged(m, 0);

    parallel_for(static_cast<std::size_t>(m), [&](std::size_t index) {
        const int spin = static_cast<int>(index);
        auto ascent = concave_ascent(
            Eigen::VectorXd::Zero(m),
            [&](const Eigen::VectorXd& t) { return ple_spin_objective(ensemble, spin, t); },
            [&](const Eigen::VectorXd& t) { return ple_spin_gradient(ensemble, spin, t); },
            config.learning_rate, config.max_iters, config.tol);
        converged[spin] = ascent.converged ? 1 : 0;
        iterations[spin] = ascent.iterations;
        per_spin[spin] = std::move(ascent.x);
    });

    FitReport report;
    report.method = "ple";
    Eigen::VectorXd w(param_count(m));
    for (int i = 0; i < m; ++i) w[i] = per_spin[i][i];
    for (int j = 0; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) {
            w[pair_index(m, j, k)] = 0.5 * (per_spin[j][k] + per_spin[k][j]);
        }
    }
    report.params = ParameterVector{m, std::move(w)};

    report.converged = true;
    for (int i = 0; i < m; ++i) {
        report.converged = report.converged && converged[i];
        report.iterations = std::max(report.iterations, iterations[i]);
    }
    report.final_energy = mean_energy_observed(report.params, ensemble);
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace emach
