#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emach/bench.hpp"
#include "emach/erasure.hpp"
#include "emach/recon.hpp"
#include "emach/sampler.hpp"
#include "emach/spin.hpp"

namespace emach {

// JSON serialization with stable key order so fixed-seed runs are
// byte-identical (wall-clock fields excepted, see strip_timing_fields).

std::string fit_report_json(const FitReport& report,
                            std::optional<double> mse_vs_truth = std::nullopt);
std::string scan_report_json(const EpsilonScanReport& report);
std::string recon_report_json(const ReconReport& report);
std::string records_json(const std::vector<BenchmarkRecord>& records);

// Sidecar written next to generated datasets: the ground-truth draw, the
// sampler settings, and w_true for later MSE scoring.
struct DatasetSidecar {
    GroundTruthSpec truth;
    SamplerConfig sampler;
    ParameterVector w_true;
};

std::string sidecar_json(const DatasetSidecar& sidecar);
DatasetSidecar read_sidecar_file(const std::string& path);

// Replaces every "seconds" value with 0 so byte-level comparisons can
// exempt timing; parses, rewrites, and re-serializes.
std::string strip_timing_fields(const std::string& json_text);

}  // namespace emach
