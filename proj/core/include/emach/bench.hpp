#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "emach/baselines.hpp"
#include "emach/erasure.hpp"
#include "emach/sampler.hpp"

namespace emach {

struct CouplingPreset {
    std::string name;
    double field_std = 0.0;
    double coupling_strength = 0.0;
};

// "weak"/"strong" map to g = 0.5 / 2.0 with a small 0.1 field scale.
CouplingPreset preset_by_name(const std::string& name);

double mse(const ParameterVector& a, const ParameterVector& b);

struct BenchmarkPlan {
    std::vector<int> sizes = {10, 20, 40, 100};
    std::vector<long> samples = {500, 1000, 5000, 10000};
    std::vector<CouplingPreset> presets = {preset_by_name("weak"), preset_by_name("strong")};
    std::vector<std::string> methods = {"em", "hopfield", "mle", "ple"};
    int replicates = 5;
    std::uint64_t seed = 0;
    int enumeration_cap = kDefaultEnumerationCap;

    // Method knobs shared across cells.
    EmConfig em;
    std::vector<double> em_grid;  // empty: default grid
    bool em_single_epsilon = false;
    MleConfig mle;
    PleConfig ple;
    SamplerConfig sampler;  // num_samples/seed/method overridden per cell
};

struct BenchmarkRecord {
    int num_spins = 0;
    long num_samples = 0;
    std::string preset;
    std::string method;
    int replicate = 0;
    double mse = 0.0;
    double seconds = 0.0;
    long iters = 0;
    double epsilon_star = 0.0;  // em only, NaN otherwise
    std::string status = "ok";  // "ok", "skipped: intractable", "failed: ..."

    bool operator==(const BenchmarkRecord& other) const;
};

// One record per (M, N, preset, method, replicate): draw w_true, sample,
// fit, score. Cells run concurrently; failures are recorded and the sweep
// continues. Fully deterministic given the plan seed.
std::vector<BenchmarkRecord> run_benchmark(const BenchmarkPlan& plan);

// Wall-clock comparison at fixed N (plan.samples.front()); cells run
// serially so measurements do not contend. MSE and timings are recorded
// per replicate; consumers take medians.
std::vector<BenchmarkRecord> run_timing(const BenchmarkPlan& plan);

// CSV with the fixed header M,N,preset,method,replicate,mse,seconds,iters,
// epsilon_star. Floats are written round-trip exact.
void write_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records);
std::vector<BenchmarkRecord> read_csv(std::istream& in);

double median(std::vector<double> values);

}  // namespace emach
