// Command-line front end: dataset generation, fitting, epsilon scans,
// benchmark/timing sweeps, and image reconstruction.
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emach/baselines.hpp"
#include "emach/bench.hpp"
#include "emach/erasure.hpp"
#include "emach/recon.hpp"
#include "emach/rng.hpp"
#include "emach/sampler.hpp"
#include "emach/serialize.hpp"

namespace {

using namespace emach;

constexpr int kExitInvalidConfig = 2;
constexpr int kExitNumericalFailure = 3;

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << contents;
}

std::vector<double> parse_grid(const std::string& text) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':') {
        throw std::invalid_argument("grid must look like lo:hi:step, got '" + text + "'");
    }
    return epsilon_grid(lo, hi, step);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

struct CommonFitFlags {
    double alpha = 0.1;
    long iters = 10000;
    double tol = 1e-6;
    std::uint64_t seed = 0;
};

void add_fit_flags(CLI::App* cmd, CommonFitFlags& flags) {
    cmd->add_option("--alpha", flags.alpha, "Learning rate");
    cmd->add_option("--iters", flags.iters, "Iteration cap");
    cmd->add_option("--tol", flags.tol, "Convergence tolerance");
    cmd->add_option("--seed", flags.seed, "RNG seed");
}

int cmd_generate(int num_spins, long num_samples, const std::string& preset_name,
                 double field_std, double coupling_g, const std::string& sampler_name,
                 int burn_in, int thinning, std::uint64_t seed, const std::string& out) {
    GroundTruthSpec truth;
    truth.num_spins = num_spins;
    if (!preset_name.empty()) {
        const auto preset = preset_by_name(preset_name);
        truth.field_std = preset.field_std;
        truth.coupling_strength = preset.coupling_strength;
    } else {
        truth.field_std = field_std;
        truth.coupling_strength = coupling_g;
    }
    truth.seed = Rng(seed).child(1).seed();

    SamplerConfig sampler;
    sampler.num_samples = num_samples;
    sampler.burn_in_sweeps = burn_in;
    sampler.thinning_sweeps = thinning;
    sampler.seed = Rng(seed).child(2).seed();
    if (sampler_name == "exact") {
        sampler.method = SampleMethod::kExactEnumeration;
    } else if (sampler_name == "metropolis") {
        sampler.method = SampleMethod::kMetropolis;
    } else if (sampler_name == "auto") {
        sampler.method = num_spins <= kDefaultEnumerationCap
                             ? SampleMethod::kExactEnumeration
                             : SampleMethod::kMetropolis;
    } else {
        throw std::invalid_argument("unknown sampler: " + sampler_name);
    }

    const auto w_true = draw_true_parameters(truth);
    const auto ensemble = sample(w_true, sampler);
    write_spins_v1_file(out, ensemble);
    write_text_file(out + ".json", sidecar_json({truth, sampler, w_true}));
    std::cout << "wrote " << out << " (M=" << num_spins << ", N=" << num_samples
              << ", U=" << ensemble.unique_count() << ") and " << out << ".json\n";
    return 0;
}

int cmd_fit(const std::string& dataset, const std::string& method, double epsilon,
            const CommonFitFlags& flags, const std::string& truth_path,
            const std::string& out, const std::string& trajectory_path) {
    const auto ensemble = read_spins_v1_file(dataset);

    FitReport report;
    if (method == "em") {
        if (!(epsilon > 0.0)) {
            throw std::invalid_argument("--method em needs --epsilon > 0");
        }
        EmConfig config;
        config.epsilon = epsilon;
        config.learning_rate = flags.alpha;
        config.max_iters = flags.iters;
        config.tol = flags.tol;
        config.seed = flags.seed;
        report = fit(ensemble, config);
    } else if (method == "hopfield") {
        report.method = "hopfield";
        report.params = hopfield_solution(ensemble);
        report.converged = true;
        report.final_energy = mean_energy_observed(report.params, ensemble);
    } else if (method == "mle") {
        MleConfig config;
        config.learning_rate = flags.alpha;
        config.max_iters = flags.iters;
        config.tol = flags.tol;
        report = mle_fit(ensemble, config);
    } else if (method == "ple") {
        PleConfig config;
        config.learning_rate = flags.alpha;
        config.max_iters = flags.iters;
        config.tol = flags.tol;
        report = ple_fit(ensemble, config);
    } else {
        throw std::invalid_argument("unknown method: " + method +
                                    " (expected em|hopfield|mle|ple)");
    }

    std::optional<double> score;
    if (!truth_path.empty()) {
        score = mse(report.params, read_sidecar_file(truth_path).w_true);
    }
    const auto json = fit_report_json(report, score);
    if (out.empty()) {
        std::cout << json;
    } else {
        write_text_file(out, json);
    }

    if (!trajectory_path.empty()) {
        std::ostringstream csv;
        csv << "iter,mean_energy\n";
        for (std::size_t i = 0; i < report.energy_trajectory.size(); ++i) {
            char line[64];
            std::snprintf(line, sizeof(line), "%zu,%.17g\n", i,
                          report.energy_trajectory[i]);
            csv << line;
        }
        write_text_file(trajectory_path, csv.str());
    }
    if (score) std::cout << "mse " << *score << "\n";
    return report.diverged ? kExitNumericalFailure : 0;
}

int cmd_scan(const std::string& dataset, const std::string& grid_text,
             const CommonFitFlags& flags, const std::string& out) {
    const auto ensemble = read_spins_v1_file(dataset);
    EmConfig config;
    config.learning_rate = flags.alpha;
    config.max_iters = flags.iters;
    config.tol = flags.tol;
    config.seed = flags.seed;
    const auto grid = grid_text.empty() ? default_epsilon_grid() : parse_grid(grid_text);
    const auto report = scan_epsilon(ensemble, grid, config);
    const auto json = scan_report_json(report);
    if (out.empty()) {
        std::cout << json;
    } else {
        write_text_file(out, json);
        std::cout << "selected epsilon " << report.selected_epsilon << " (plateau width "
                  << report.plateau_width << ")\n";
    }
    return 0;
}

struct SweepFlags {
    std::string sizes = "10,20";
    std::string samples = "1000,5000";
    std::string presets = "weak,strong";
    std::string methods = "em,hopfield,mle,ple";
    int replicates = 5;
    std::uint64_t seed = 0;
    std::string grid_text;
    bool single_epsilon = false;
    double epsilon = 0.5;
    long em_iters = 10000;
    long mle_iters = 300;
    long ple_iters = 20000;
    double tol = 1e-6;
    std::string out;
    std::string format = "csv";
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& flags) {
    cmd->add_option("--sizes", flags.sizes, "System sizes M, comma separated");
    cmd->add_option("--samples", flags.samples, "Sample counts N, comma separated");
    cmd->add_option("--presets", flags.presets, "Coupling presets (weak,strong)");
    cmd->add_option("--methods", flags.methods, "Methods to run (em,hopfield,mle,ple)");
    cmd->add_option("--replicates", flags.replicates, "Replicates per cell");
    cmd->add_option("--seed", flags.seed, "Plan seed");
    cmd->add_option("--grid", flags.grid_text, "Epsilon grid lo:hi:step for em scans");
    cmd->add_flag("--single-epsilon", flags.single_epsilon,
                  "Fit em at one epsilon instead of scanning");
    cmd->add_option("--epsilon", flags.epsilon, "Epsilon for --single-epsilon");
    cmd->add_option("--em-iters", flags.em_iters, "EM iteration cap");
    cmd->add_option("--mle-iters", flags.mle_iters, "MLE iteration cap");
    cmd->add_option("--ple-iters", flags.ple_iters, "PLE iteration cap");
    cmd->add_option("--tol", flags.tol, "Convergence tolerance for every method");
    cmd->add_option("--out", flags.out, "Output path (stdout if omitted)");
    cmd->add_option("--format", flags.format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
}

BenchmarkPlan plan_from_flags(const SweepFlags& flags) {
    BenchmarkPlan plan;
    plan.sizes.clear();
    for (const auto& item : split_list(flags.sizes)) plan.sizes.push_back(std::stoi(item));
    plan.samples.clear();
    for (const auto& item : split_list(flags.samples)) plan.samples.push_back(std::stol(item));
    plan.presets.clear();
    for (const auto& item : split_list(flags.presets)) plan.presets.push_back(preset_by_name(item));
    plan.methods = split_list(flags.methods);
    plan.replicates = flags.replicates;
    plan.seed = flags.seed;
    plan.em.max_iters = flags.em_iters;
    plan.em.tol = flags.tol;
    plan.em.epsilon = flags.epsilon;
    plan.em_single_epsilon = flags.single_epsilon;
    if (!flags.grid_text.empty()) plan.em_grid = parse_grid(flags.grid_text);
    plan.mle.max_iters = flags.mle_iters;
    plan.mle.tol = flags.tol;
    plan.ple.max_iters = flags.ple_iters;
    plan.ple.tol = flags.tol;
    return plan;
}

int emit_records(const std::vector<BenchmarkRecord>& records, const SweepFlags& flags) {
    std::string text;
    if (flags.format == "json") {
        text = records_json(records);
    } else {
        std::ostringstream out;
        write_csv(out, records);
        text = out.str();
    }
    if (flags.out.empty()) {
        std::cout << text;
    } else {
        write_text_file(flags.out, text);
        std::cout << "wrote " << records.size() << " records to " << flags.out << "\n";
    }
    for (const auto& record : records) {
        if (record.status.rfind("failed", 0) == 0) return kExitNumericalFailure;
    }
    return 0;
}

int cmd_reconstruct(const std::string& train_images, const std::string& train_labels,
                    const std::string& test_images, const std::string& test_labels,
                    int digit, int threshold, double majority, int missing, int count,
                    double epsilon, const std::string& grid_text, const CommonFitFlags& flags,
                    const std::string& out, const std::string& out_dir) {
    const auto load_class = [&](const std::string& image_path, const std::string& label_path) {
        const auto raws = read_idx_images(image_path);
        std::vector<BinaryImage> images;
        if (label_path.empty()) {
            for (const auto& raw : raws) images.push_back(binarize(raw, threshold));
            return images;
        }
        const auto labels = read_idx_labels(label_path);
        if (labels.size() != raws.size()) {
            throw std::invalid_argument("image/label count mismatch");
        }
        for (std::size_t i = 0; i < raws.size(); ++i) {
            if (labels[i] == digit) images.push_back(binarize(raws[i], threshold));
        }
        return images;
    };

    const auto train = load_class(train_images, train_labels);
    const auto tests = load_class(test_images, test_labels);
    if (train.empty()) throw std::invalid_argument("no training images for the digit filter");
    if (tests.empty()) throw std::invalid_argument("no test images for the digit filter");

    ReconOptions options;
    options.majority = majority;
    options.missing_pixels = missing;
    options.num_test_images = count;
    options.seed = flags.seed;
    options.fixed_epsilon = epsilon;
    if (!grid_text.empty()) options.epsilon_grid = parse_grid(grid_text);
    options.em.learning_rate = flags.alpha;
    options.em.max_iters = flags.iters;
    options.em.tol = flags.tol;

    const auto result = run_recon_pipeline(train, tests, options);
    const auto json = recon_report_json(result.report);
    if (out.empty()) {
        std::cout << json;
    } else {
        write_text_file(out, json);
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (std::size_t i = 0; i < result.reconstructed.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "recon_%03zu.pgm", i);
            write_pgm((std::filesystem::path(out_dir) / name).string(),
                      result.reconstructed[i]);
        }
    }
    std::cout << "variable pixels " << result.report.variable_count << ", model accuracy "
              << result.report.model_accuracy << ", baseline accuracy "
              << result.report.baseline_accuracy << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse Ising inference: erasure-machine learner with Hopfield, exact-MLE,"
                 " and pseudo-likelihood baselines"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Draw w_true and sample a dataset");
    int gen_m = 20;
    long gen_n = 5000;
    std::string gen_preset, gen_sampler = "auto", gen_out = "dataset.spins";
    double gen_field_std = 0.1, gen_g = 0.5;
    int gen_burn_in = 1000, gen_thinning = 10;
    std::uint64_t gen_seed = 0;
    generate->add_option("--M", gen_m, "Number of spins")->required();
    generate->add_option("--N", gen_n, "Number of samples")->required();
    generate->add_option("--preset", gen_preset, "Coupling preset (weak|strong)");
    generate->add_option("--field-std", gen_field_std, "Std of the fields h");
    generate->add_option("--g", gen_g, "Coupling strength (Var(J) = g^2/M)");
    generate->add_option("--sampler", gen_sampler, "exact|metropolis|auto");
    generate->add_option("--burn-in", gen_burn_in, "Metropolis burn-in sweeps");
    generate->add_option("--thinning", gen_thinning, "Metropolis sweeps between records");
    generate->add_option("--seed", gen_seed, "RNG seed");
    generate->add_option("--out", gen_out, "Output dataset path");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit one method to a dataset");
    std::string fit_dataset, fit_method = "em", fit_truth, fit_out, fit_trajectory;
    double fit_epsilon = 0.0;
    CommonFitFlags fit_flags;
    fit_cmd->add_option("--dataset", fit_dataset, "spins-v1 dataset")->required();
    fit_cmd->add_option("--method", fit_method, "em|hopfield|mle|ple");
    fit_cmd->add_option("--epsilon", fit_epsilon, "Epsilon for --method em");
    add_fit_flags(fit_cmd, fit_flags);
    fit_cmd->add_option("--truth", fit_truth, "Dataset sidecar JSON for MSE scoring");
    fit_cmd->add_option("--out", fit_out, "Report JSON path (stdout if omitted)");
    fit_cmd->add_option("--trajectory", fit_trajectory, "Per-iteration energy CSV path");

    // scan
    auto* scan_cmd = app.add_subcommand("scan", "Fit em across an epsilon grid");
    std::string scan_dataset, scan_grid, scan_out;
    CommonFitFlags scan_flags;
    scan_cmd->add_option("--dataset", scan_dataset, "spins-v1 dataset")->required();
    scan_cmd->add_option("--grid", scan_grid, "Epsilon grid lo:hi:step");
    add_fit_flags(scan_cmd, scan_flags);
    scan_cmd->add_option("--out", scan_out, "Scan report JSON path (stdout if omitted)");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "MSE benchmark sweep");
    SweepFlags bench_flags;
    add_sweep_flags(bench_cmd, bench_flags);

    // time
    auto* time_cmd = app.add_subcommand("time", "Wall-clock comparison at fixed N");
    SweepFlags time_flags;
    time_flags.samples = "10000";
    time_flags.replicates = 1;
    add_sweep_flags(time_cmd, time_flags);

    // reconstruct
    auto* recon_cmd = app.add_subcommand("reconstruct", "Missing-pixel reconstruction");
    std::string rec_train_images, rec_train_labels, rec_test_images, rec_test_labels;
    std::string rec_out, rec_out_dir, rec_grid;
    int rec_digit = 8, rec_threshold = 1, rec_missing = 90, rec_count = 50;
    double rec_majority = 0.8, rec_epsilon = 0.0;
    CommonFitFlags rec_flags;
    recon_cmd->add_option("--train-images", rec_train_images, "IDX image file")->required();
    recon_cmd->add_option("--train-labels", rec_train_labels, "IDX label file");
    recon_cmd->add_option("--test-images", rec_test_images, "IDX image file")->required();
    recon_cmd->add_option("--test-labels", rec_test_labels, "IDX label file");
    recon_cmd->add_option("--digit", rec_digit, "Class selected by the label filter");
    recon_cmd->add_option("--threshold", rec_threshold, "Binarization threshold (strict >)");
    recon_cmd->add_option("--majority", rec_majority, "Stable-pixel majority fraction");
    recon_cmd->add_option("--missing", rec_missing, "Missing pixels per test image");
    recon_cmd->add_option("--count", rec_count, "Test images to reconstruct");
    recon_cmd->add_option("--epsilon", rec_epsilon, "Fixed epsilon (skips the scan)");
    recon_cmd->add_option("--grid", rec_grid, "Epsilon grid lo:hi:step for the scan");
    add_fit_flags(recon_cmd, rec_flags);
    recon_cmd->add_option("--out", rec_out, "Report JSON path (stdout if omitted)");
    recon_cmd->add_option("--out-dir", rec_out_dir, "Directory for reconstructed PGMs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalidConfig;
    }

    try {
        if (*generate) {
            return cmd_generate(gen_m, gen_n, gen_preset, gen_field_std, gen_g, gen_sampler,
                                gen_burn_in, gen_thinning, gen_seed, gen_out);
        }
        if (*fit_cmd) {
            return cmd_fit(fit_dataset, fit_method, fit_epsilon, fit_flags, fit_truth,
                           fit_out, fit_trajectory);
        }
        if (*scan_cmd) {
            return cmd_scan(scan_dataset, scan_grid, scan_flags, scan_out);
        }
        if (*bench_cmd) {
            return emit_records(run_benchmark(plan_from_flags(bench_flags)), bench_flags);
        }
        if (*time_cmd) {
            return emit_records(run_timing(plan_from_flags(time_flags)), time_flags);
        }
        if (*recon_cmd) {
            return cmd_reconstruct(rec_train_images, rec_train_labels, rec_test_images,
                                   rec_test_labels, rec_digit, rec_threshold, rec_majority,
                                   rec_missing, rec_count, rec_epsilon, rec_grid, rec_flags,
                                   rec_out, rec_out_dir);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
    return 0;
}
