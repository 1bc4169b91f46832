#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emach/ensemble.hpp"
#include "emach/erasure.hpp"
#include "emach/spin.hpp"

namespace emach {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

// Pixels are -1, +1, or 0; 0 marks a missing pixel and is only legal in
// test images fed to reconstruct().
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::int8_t> pixels;

    int size() const { return width * height; }
};

// Strict threshold: pixel > threshold maps to +1, else -1.
BinaryImage binarize(const GrayImage& raw, int threshold = 1);

// Split of the pixel grid into stable pixels (one value in more than
// `majority` of the training samples, strictly) and the remaining variable
// pixels, in ascending index order. The variable pixels carry their
// training-majority sign, used to seed reconstruction.
struct PixelPartition {
    struct StablePixel {
        int index;
        std::int8_t value;
    };
    int total_pixels = 0;
    std::vector<StablePixel> stable;
    std::vector<int> variable;
    std::vector<std::int8_t> variable_majority;
};

PixelPartition partition_pixels(const std::vector<BinaryImage>& train, double majority);

// Observations over the variable pixels only (model dimension M_v).
ObservationEnsemble variable_pixel_ensemble(const std::vector<BinaryImage>& train,
                                            const PixelPartition& partition);

struct ReconstructionStats {
    BinaryImage image;
    int sweeps = 0;
    std::vector<double> objective_trace;  // w.O after each sweep, non-decreasing
};

// Fill missing pixels: stable ones from their stored value, variable ones
// by iterated conditional maximization of w.O over the variable-pixel
// model (majority-sign start, ascending sweeps, s_i <- sign(theta_i) with
// ties to +1, until a fixed point or 100 sweeps).
ReconstructionStats reconstruct_with_stats(const BinaryImage& test,
                                           const PixelPartition& partition,
                                           const ParameterVector& params);
BinaryImage reconstruct(const BinaryImage& test, const PixelPartition& partition,
                        const ParameterVector& params);

// IDX containers (big-endian), magic 2051 for unsigned-byte image stacks
// and 2049 for label vectors.
std::vector<GrayImage> read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);
void write_idx_images(const std::string& path, const std::vector<GrayImage>& images);
void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels);

// Binary PGM, maxval 255, -1 -> 0 and +1 -> 255.
void write_pgm(const std::string& path, const BinaryImage& image);

struct ReconOptions {
    double majority = 0.8;
    int missing_pixels = 90;
    int num_test_images = 50;
    std::uint64_t seed = 0;
    std::vector<double> epsilon_grid;  // empty: default scan grid
    double fixed_epsilon = 0.0;        // > 0: skip the scan and use this
    EmConfig em;
};

struct ReconImageResult {
    int image_index = 0;
    int missing_total = 0;
    int missing_variable = 0;
    int correct_model = 0;     // of missing_total, via the fitted model
    int correct_baseline = 0;  // of missing_total, majority fill only
    int sweeps = 0;
};

struct ReconReport {
    int width = 0;
    int height = 0;
    int variable_count = 0;
    long train_count = 0;
    double epsilon = 0.0;
    bool scanned = false;
    std::vector<ReconImageResult> images;
    double model_accuracy = 0.0;     // pooled over all missing pixels
    double baseline_accuracy = 0.0;
};

struct ReconPipelineResult {
    ReconReport report;
    PixelPartition partition;
    ParameterVector params;
    std::vector<BinaryImage> reconstructed;
};

// The full pipeline: partition the training images, fit the variable-pixel
// model, then knock `missing_pixels` random pixels out of each test image
// and reconstruct them. Test images must be complete (no zeros); they are
// the accuracy reference.
ReconPipelineResult run_recon_pipeline(const std::vector<BinaryImage>& train,
                                       const std::vector<BinaryImage>& tests,
                                       const ReconOptions& options);

}  // namespace emach
