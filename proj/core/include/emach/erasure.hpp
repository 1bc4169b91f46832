#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emach/ensemble.hpp"
#include "emach/ising.hpp"
#include "emach/spin.hpp"

namespace emach {

struct EmConfig {
    double epsilon = 0.5;
    double learning_rate = 0.1;   // alpha
    long max_iters = 10000;
    double tol = 1e-6;            // stop when max_I |delta w^I| < tol * alpha
    double init_scale = 0.01;     // w0 ~ N(0, init_scale^2)
    std::uint64_t seed = 0;
    double divergence_bound = 1e3;  // abort when max_I |w^I| exceeds this
};

struct FitReport {
    std::string method;
    double epsilon = 0.0;  // meaningful for method == "em"
    ParameterVector params;
    long iterations = 0;
    bool converged = false;
    bool diverged = false;
    bool guard_exceeded = false;  // max_I |eps w^I| >= 1 at any iteration
    double final_energy = 0.0;    // <E>_f at the returned parameters
    double final_residual = 0.0;  // max_I |<O_I>_ftilde - eps w^I| (em)
    std::vector<double> energy_trajectory;  // <E>_f per iteration
    double seconds = 0.0;
    std::uint64_t seed = 0;
};

// f~_u proportional to f_u * exp((eps - 1) * w.O(sigma_u)), normalized over
// the observed support. Everything happens in the log domain with a
// max-shift; the model's unknown Z^(eps-1) cancels in the normalization.
ReweightedEnsemble reweight(const ObservationEnsemble& ensemble,
                            const ParameterVector& params, double epsilon);

Eigen::VectorXd reweighted_moments(const ReweightedEnsemble& reweighted);

// One update w + alpha * (<O>_f~ - eps w).
ParameterVector em_step(const ParameterVector& params, const ObservationEnsemble& ensemble,
                        const EmConfig& config);

// Full fit: random N(0, init_scale^2) start, iterate em_step, record <E>_f
// per iteration, stop at tolerance, iteration cap, or the divergence guard.
FitReport fit(const ObservationEnsemble& ensemble, const EmConfig& config);

struct EpsilonScanReport {
    std::vector<double> grid;
    std::vector<FitReport> fits;      // one per grid point, grid order
    int selected_index = -1;          // argmax of final <E>_f, ties toward smaller eps
    double selected_epsilon = 0.0;
    // Contiguous grid range around the maximum whose final <E>_f is within
    // 1% of the maximum.
    int plateau_begin = 0;
    int plateau_end = 0;  // exclusive
    double plateau_width = 0.0;
};

// Independent fits over an epsilon grid (run concurrently), selecting the
// epsilon whose converged parameters maximize the raw observed mean energy.
EpsilonScanReport scan_epsilon(const ObservationEnsemble& ensemble,
                               const std::vector<double>& grid, const EmConfig& base_config);

// Helper: {lo, lo+step, ..., <= hi} with exact endpoints where possible.
std::vector<double> epsilon_grid(double lo, double hi, double step);
std::vector<double> default_epsilon_grid();  // 0.05 : 1.00 : 0.05

}  // namespace emach
