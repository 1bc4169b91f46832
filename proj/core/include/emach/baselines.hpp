#pragma once

#include "emach/ensemble.hpp"
#include "emach/erasure.hpp"
#include "emach/ising.hpp"
#include "emach/spin.hpp"

namespace emach {

// Closed-form estimate w^I = <O_I>_f.
ParameterVector hopfield_solution(const ObservationEnsemble& ensemble);

struct MleConfig {
    double learning_rate = 0.25;
    long max_iters = 2000;
    double tol = 1e-6;  // on max_I |d lnL / dw^I|
    int enumeration_cap = kDefaultEnumerationCap;
};

// Exact log likelihood per sample, lnL = w.<O>_f - ln Z(w), and its
// gradient <O>_f - <O>_p. Enumerating entry points; M <= cap.
double mle_log_likelihood(const ParameterVector& params, const ObservationEnsemble& ensemble,
                          int enumeration_cap = kDefaultEnumerationCap);
Eigen::VectorXd mle_gradient(const ParameterVector& params, const ObservationEnsemble& ensemble,
                             int enumeration_cap = kDefaultEnumerationCap);

// Gradient ascent on the exact log likelihood with a backtracking line
// search (step halves on a likelihood decrease, grows again on success).
FitReport mle_fit(const ObservationEnsemble& ensemble, const MleConfig& config);

struct PleConfig {
    double learning_rate = 0.25;
    long max_iters = 20000;
    double tol = 1e-6;  // on the per-spin gradient max-norm
};

// Per-spin conditional model p(s_i | s_rest) = exp(s_i theta_i) / (2 cosh theta_i)
// with theta_i = h^i + sum_{k != i} J^{ik} s_k. The spin's parameters are a
// length-M vector with slot i holding h^i and slot k != i holding J^{ik}.
double ple_spin_objective(const ObservationEnsemble& ensemble, int spin,
                          const Eigen::VectorXd& spin_params);
Eigen::VectorXd ple_spin_gradient(const ObservationEnsemble& ensemble, int spin,
                                  const Eigen::VectorXd& spin_params);

// Independent per-spin conditional-likelihood ascent (run concurrently),
// followed by symmetrization J^{jk} <- (J_j->k + J_k->j) / 2. Unregularized.
FitReport ple_fit(const ObservationEnsemble& ensemble, const PleConfig& config);

}  // namespace emach
