#pragma once

#include <Eigen/Core>

#include "emach/ensemble.hpp"
#include "emach/spin.hpp"

namespace emach {

// Exact enumeration over 2^M configurations is refused above this size
// (~3.4e7 terms at 25); every enumerating entry point takes it as an
// overridable argument.
inline constexpr int kDefaultEnumerationCap = 25;

// w . O(sigma) = sum_i h^i s_i + sum_{j<k} J^{jk} s_j s_k.
// The energy convention throughout is E_sigma = -(w . O(sigma)) with
// p_sigma proportional to exp(w . O(sigma)).
double operator_sum(const ParameterVector& params, const SpinConfiguration& config);

// w . O(sigma_u) for every unique configuration, as two matrix products
// against the ensemble's +-1 spin matrix.
Eigen::VectorXd operator_values(const ParameterVector& params,
                                const ObservationEnsemble& ensemble);

// Same, for an arbitrary (rows x M) +-1 matrix.
Eigen::VectorXd operator_values(const ParameterVector& params, const Eigen::MatrixXd& spins);

// <O_I>_f over the observed support; entries lie in [-1, 1].
Eigen::VectorXd observed_moments(const ObservationEnsemble& ensemble);

// <O_I> under arbitrary nonnegative weights on the observed support.
Eigen::VectorXd weighted_moments(const ObservationEnsemble& ensemble,
                                 const Eigen::VectorXd& weights);

// <E>_f = sum_u f_u * -(w . O(sigma_u)), raw observed frequencies only.
double mean_energy_observed(const ParameterVector& params,
                            const ObservationEnsemble& ensemble);

// ln Z(w) by full enumeration with a running max-shift. Throws on
// M > cap ("intractable enumeration").
double log_partition_exact(const ParameterVector& params,
                           int enumeration_cap = kDefaultEnumerationCap);

struct ExactModelStats {
    double log_partition = 0.0;
    Eigen::VectorXd moments;  // <O_I>_p, length L
};

// ln Z(w) together with the exact model moments, one enumeration pass.
ExactModelStats exact_model_stats(const ParameterVector& params,
                                  int enumeration_cap = kDefaultEnumerationCap);

struct TruncatedLogPartition {
    double value = 0.0;             // M ln 2 + sum ln cosh(eps h) + sum ln cosh(eps J)
    double max_scaled_param = 0.0;  // max_I |eps w^I|
    bool guard_exceeded = false;    // max_I |eps w^I| >= 1, advisory only
};

// Order-eps^2 truncation of the re-weighted log partition function.
TruncatedLogPartition log_partition_truncated(const ParameterVector& params, double epsilon);

}  // namespace emach
