#pragma once

#include <cstdint>
#include <span>

#include "emach/ensemble.hpp"
#include "emach/ising.hpp"
#include "emach/spin.hpp"

namespace emach {

// Ground-truth parameter draw: h^i ~ N(0, field_std^2) and
// J^{jk} ~ N(0, coupling_strength^2 / M). The 1/M coupling variance keeps
// the energy extensive at any system size.
struct GroundTruthSpec {
    int num_spins = 0;
    double field_std = 0.0;
    double coupling_strength = 0.0;
    std::uint64_t seed = 0;
};

ParameterVector draw_true_parameters(const GroundTruthSpec& spec);

enum class SampleMethod { kExactEnumeration, kMetropolis };

struct SamplerConfig {
    long num_samples = 0;
    SampleMethod method = SampleMethod::kMetropolis;
    int burn_in_sweeps = 1000;
    int thinning_sweeps = 10;
    std::uint64_t seed = 0;
    int enumeration_cap = kDefaultEnumerationCap;
};

// N independent categorical draws from the fully enumerated Boltzmann
// distribution. Requires M <= enumeration cap.
ObservationEnsemble sample_exact(const ParameterVector& params, const SamplerConfig& config);

// Single-spin-flip Metropolis: one sweep is M proposals at uniformly
// random sites, acceptance min(1, exp(delta(w.O))). Records every
// `thinning_sweeps` sweeps after burn-in until N samples are collected.
ObservationEnsemble sample_metropolis(const ParameterVector& params,
                                      const SamplerConfig& config);

// Dispatch on config.method.
ObservationEnsemble sample(const ParameterVector& params, const SamplerConfig& config);

// Change of w.O when spin i of `signs` (+-1 entries) is flipped; the
// local-field shortcut used inside the Metropolis kernel, exposed so the
// identity against full recomputation is testable.
double flip_delta(const ParameterVector& params, std::span<const double> signs, int site);

}  // namespace emach
