#include "emach/serialize.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <json.hpp>

namespace emach {

namespace {

using Json = nlohmann::ordered_json;

Json params_to_json(const ParameterVector& params) {
    return std::vector<double>(params.w.data(), params.w.data() + params.w.size());
}

Eigen::VectorXd vector_from_json(const Json& array) {
    const auto values = array.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<long>(values.size()));
}

Json fit_report_to_json(const FitReport& report) {
    Json json;
    json["method"] = report.method;
    if (report.method == "em") json["epsilon"] = report.epsilon;
    json["M"] = report.params.num_spins;
    json["iterations"] = report.iterations;
    json["converged"] = report.converged;
    json["diverged"] = report.diverged;
    json["truncation_guard_exceeded"] = report.guard_exceeded;
    json["final_energy"] = report.final_energy;
    json["final_residual"] = report.final_residual;
    json["seed"] = report.seed;
    json["seconds"] = report.seconds;
    json["w"] = params_to_json(report.params);
    return json;
}

Json record_to_json(const BenchmarkRecord& record) {
    Json json;
    json["M"] = record.num_spins;
    json["N"] = record.num_samples;
    json["preset"] = record.preset;
    json["method"] = record.method;
    json["replicate"] = record.replicate;
    json["mse"] = std::isnan(record.mse) ? Json() : Json(record.mse);
    json["seconds"] = record.seconds;
    json["iters"] = record.iters;
    json["epsilon_star"] =
        std::isnan(record.epsilon_star) ? Json() : Json(record.epsilon_star);
    json["status"] = record.status;
    return json;
}

}  // namespace

std::string fit_report_json(const FitReport& report, std::optional<double> mse_vs_truth) {
    Json json = fit_report_to_json(report);
    if (mse_vs_truth) json["mse_vs_truth"] = *mse_vs_truth;
    return json.dump(2) + "\n";
}

std::string scan_report_json(const EpsilonScanReport& report) {
    Json json;
    json["grid"] = report.grid;
    json["selected_epsilon"] = report.selected_epsilon;
    json["selected_index"] = report.selected_index;
    json["plateau_begin"] = report.plateau_begin;
    json["plateau_end"] = report.plateau_end;
    json["plateau_width"] = report.plateau_width;
    Json fits = Json::array();
    for (const auto& fit : report.fits) fits.push_back(fit_report_to_json(fit));
    json["fits"] = fits;
    return json.dump(2) + "\n";
}

std::string recon_report_json(const ReconReport& report) {
    Json json;
    json["width"] = report.width;
    json["height"] = report.height;
    json["train_count"] = report.train_count;
    json["variable_pixels"] = report.variable_count;
    json["epsilon"] = report.epsilon;
    json["epsilon_scanned"] = report.scanned;
    json["model_accuracy"] = report.model_accuracy;
    json["baseline_accuracy"] = report.baseline_accuracy;
    Json images = Json::array();
    for (const auto& image : report.images) {
        Json entry;
        entry["image"] = image.image_index;
        entry["missing"] = image.missing_total;
        entry["missing_variable"] = image.missing_variable;
        entry["correct_model"] = image.correct_model;
        entry["correct_baseline"] = image.correct_baseline;
        entry["icm_sweeps"] = image.sweeps;
        images.push_back(entry);
    }
    json["images"] = images;
    return json.dump(2) + "\n";
}

std::string records_json(const std::vector<BenchmarkRecord>& records) {
    Json array = Json::array();
    for (const auto& record : records) array.push_back(record_to_json(record));
    return array.dump(2) + "\n";
}

std::string sidecar_json(const DatasetSidecar& sidecar) {
    Json json;
    json["M"] = sidecar.truth.num_spins;
    json["field_std"] = sidecar.truth.field_std;
    json["coupling_strength"] = sidecar.truth.coupling_strength;
    json["truth_seed"] = sidecar.truth.seed;
    json["N"] = sidecar.sampler.num_samples;
    json["sampler"] = sidecar.sampler.method == SampleMethod::kExactEnumeration
                          ? "exact-enumeration"
                          : "metropolis";
    json["burn_in_sweeps"] = sidecar.sampler.burn_in_sweeps;
    json["thinning_sweeps"] = sidecar.sampler.thinning_sweeps;
    json["sampler_seed"] = sidecar.sampler.seed;
    json["w_true"] = params_to_json(sidecar.w_true);
    return json.dump(2) + "\n";
}

DatasetSidecar read_sidecar_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open sidecar: " + path);
    Json json;
    in >> json;

    DatasetSidecar sidecar;
    sidecar.truth.num_spins = json.at("M").get<int>();
    sidecar.truth.field_std = json.at("field_std").get<double>();
    sidecar.truth.coupling_strength = json.at("coupling_strength").get<double>();
    sidecar.truth.seed = json.at("truth_seed").get<std::uint64_t>();
    sidecar.sampler.num_samples = json.at("N").get<long>();
    sidecar.sampler.method = json.at("sampler").get<std::string>() == "exact-enumeration"
                                 ? SampleMethod::kExactEnumeration
                                 : SampleMethod::kMetropolis;
    sidecar.sampler.burn_in_sweeps = json.at("burn_in_sweeps").get<int>();
    sidecar.sampler.thinning_sweeps = json.at("thinning_sweeps").get<int>();
    sidecar.sampler.seed = json.at("sampler_seed").get<std::uint64_t>();
    sidecar.w_true =
        ParameterVector{sidecar.truth.num_spins, vector_from_json(json.at("w_true"))};
    return sidecar;
}

std::string strip_timing_fields(const std::string& json_text) {
    Json json = Json::parse(json_text);
    const std::function<void(Json&)> scrub = [&](Json& node) {
        if (node.is_object()) {
            for (auto& [key, value] : node.items()) {
                if (key == "seconds") {
                    value = 0.0;
                } else {
                    scrub(value);
                }
            }
        } else if (node.is_array()) {
            for (auto& value : node) scrub(value);
        }
    };
    scrub(json);
    return json.dump(2) + "\n";
}

}  // namespace emach
