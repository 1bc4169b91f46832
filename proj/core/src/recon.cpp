#include "emach/recon.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "emach/parallel.hpp"
#include "emach/rng.hpp"

namespace emach {

BinaryImage binarize(const GrayImage& raw, int threshold) {
    BinaryImage image{raw.width, raw.height, {}};
    image.pixels.resize(raw.pixels.size());
    for (std::size_t i = 0; i < raw.pixels.size(); ++i) {
        image.pixels[i] = raw.pixels[i] > threshold ? +1 : -1;
    }
    return image;
}

PixelPartition partition_pixels(const std::vector<BinaryImage>& train, double majority) {
    if (train.empty()) throw std::invalid_argument("partition: empty training set");
    if (!(majority > 0.5) || !(majority < 1.0)) {
        throw std::invalid_argument("partition: majority fraction must be in (0.5, 1)");
    }
    const int total = train.front().size();
    std::vector<long> plus_counts(total, 0);
    for (const auto& image : train) {
        if (image.size() != total) throw std::invalid_argument("partition: size mismatch");
        for (int i = 0; i < total; ++i) {
            if (image.pixels[i] == 0) {
                throw std::invalid_argument("partition: training images must not have missing pixels");
            }
            if (image.pixels[i] > 0) ++plus_counts[i];
        }
    }

    PixelPartition partition;
    partition.total_pixels = total;
    const double n = static_cast<double>(train.size());
    for (int i = 0; i < total; ++i) {
        const double plus_fraction = plus_counts[i] / n;
        const std::int8_t majority_sign = plus_fraction >= 0.5 ? +1 : -1;
        if (plus_fraction > majority || (1.0 - plus_fraction) > majority) {
            partition.stable.push_back({i, majority_sign});
        } else {
            partition.variable.push_back(i);
            partition.variable_majority.push_back(majority_sign);
        }
    }
    return partition;
}

ObservationEnsemble variable_pixel_ensemble(const std::vector<BinaryImage>& train,
                                            const PixelPartition& partition) {
    const int m = static_cast<int>(partition.variable.size());
    if (m < 1) throw std::invalid_argument("variable ensemble: no variable pixels");
    std::vector<SpinConfiguration> samples;
    samples.reserve(train.size());
    for (const auto& image : train) {
        SpinConfiguration config(m);
        for (int v = 0; v < m; ++v) {
            config.set_spin(v, image.pixels[partition.variable[v]]);
        }
        samples.push_back(std::move(config));
    }
    return ObservationEnsemble::from_samples(m, samples);
}

ReconstructionStats reconstruct_with_stats(const BinaryImage& test,
                                           const PixelPartition& partition,
                                           const ParameterVector& params) {
    const int m = static_cast<int>(partition.variable.size());
    if (params.num_spins != m) {
        throw std::invalid_argument("reconstruct: parameter dimension " +
                                    std::to_string(params.num_spins) +
                                    " does not match variable pixel count " +
                                    std::to_string(m));
    }
    if (test.size() != partition.total_pixels) {
        throw std::invalid_argument("reconstruct: image size mismatch");
    }

    ReconstructionStats stats;
    stats.image = test;
    auto& pixels = stats.image.pixels;

    for (const auto& [index, value] : partition.stable) {
        if (pixels[index] == 0) pixels[index] = value;
    }

    // Variable-pixel state, majority-seeded where missing.
    std::vector<double> signs(m);
    std::vector<int> missing;
    for (int v = 0; v < m; ++v) {
        const std::int8_t pixel = pixels[partition.variable[v]];
        if (pixel == 0) {
            signs[v] = partition.variable_majority[v];
            missing.push_back(v);
        } else {
            signs[v] = pixel;
        }
    }

    if (!missing.empty()) {
        const Eigen::MatrixXd coupling = params.coupling_matrix();
        const auto objective = [&] {
            double value = 0.0;
            for (int v = 0; v < m; ++v) {
                value += params.w[v] * signs[v];
                for (int k = v + 1; k < m; ++k) value += coupling(v, k) * signs[v] * signs[k];
            }
            return value;
        };
        for (int sweep = 0; sweep < 100; ++sweep) {
            bool changed = false;
            for (const int v : missing) {
                double theta = params.w[v];
                for (int k = 0; k < m; ++k) theta += coupling(v, k) * signs[k];
                const double updated = theta >= 0.0 ? 1.0 : -1.0;
                if (updated != signs[v]) {
                    signs[v] = updated;
                    changed = true;
                }
            }
            ++stats.sweeps;
            stats.objective_trace.push_back(objective());
            if (!changed) break;
        }
    }

    for (int v = 0; v < m; ++v) {
        pixels[partition.variable[v]] = signs[v] > 0 ? +1 : -1;
    }
    return stats;
}

BinaryImage reconstruct(const BinaryImage& test, const PixelPartition& partition,
                        const ParameterVector& params) {
    return reconstruct_with_stats(test, partition, params).image;
}

namespace {

constexpr std::uint32_t kImageMagic = 2051;
constexpr std::uint32_t kLabelMagic = 2049;

std::uint32_t read_be32(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw std::invalid_argument("idx: truncated header");
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

void write_be32(std::ostream& out, std::uint32_t value) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(value >> 24), static_cast<unsigned char>(value >> 16),
        static_cast<unsigned char>(value >> 8), static_cast<unsigned char>(value)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

std::vector<GrayImage> read_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open idx file: " + path);
    if (const auto magic = read_be32(in); magic != kImageMagic) {
        throw std::invalid_argument("idx: bad image magic " + std::to_string(magic) +
                                    " in " + path);
    }
    const std::uint32_t count = read_be32(in);
    const std::uint32_t rows = read_be32(in);
    const std::uint32_t cols = read_be32(in);
    std::vector<GrayImage> images(count);
    for (auto& image : images) {
        image.width = static_cast<int>(cols);
        image.height = static_cast<int>(rows);
        image.pixels.resize(rows * cols);
        in.read(reinterpret_cast<char*>(image.pixels.data()), rows * cols);
        if (!in) throw std::invalid_argument("idx: truncated image data in " + path);
    }
    return images;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open idx file: " + path);
    if (const auto magic = read_be32(in); magic != kLabelMagic) {
        throw std::invalid_argument("idx: bad label magic " + std::to_string(magic) +
                                    " in " + path);
    }
    const std::uint32_t count = read_be32(in);
    std::vector<std::uint8_t> labels(count);
    in.read(reinterpret_cast<char*>(labels.data()), count);
    if (!in) throw std::invalid_argument("idx: truncated label data in " + path);
    return labels;
}

void write_idx_images(const std::string& path, const std::vector<GrayImage>& images) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write idx file: " + path);
    const int rows = images.empty() ? 0 : images.front().height;
    const int cols = images.empty() ? 0 : images.front().width;
    write_be32(out, kImageMagic);
    write_be32(out, static_cast<std::uint32_t>(images.size()));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    for (const auto& image : images) {
        out.write(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
    }
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write idx file: " + path);
    write_be32(out, kLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()), labels.size());
}

void write_pgm(const std::string& path, const BinaryImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write pgm file: " + path);
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    for (const std::int8_t pixel : image.pixels) {
        if (pixel == 0) throw std::invalid_argument("pgm: image still has missing pixels");
        out.put(pixel > 0 ? '\xff' : '\0');
    }
}

ReconPipelineResult run_recon_pipeline(const std::vector<BinaryImage>& train,
                                       const std::vector<BinaryImage>& tests,
                                       const ReconOptions& options) {
    if (tests.empty()) throw std::invalid_argument("recon: no test images");

    ReconPipelineResult result;
    result.partition = partition_pixels(train, options.majority);
    const auto ensemble = variable_pixel_ensemble(train, result.partition);

    EmConfig em = options.em;
    em.seed = Rng(options.seed).child(0x1117).seed();
    ReconReport& report = result.report;
    if (options.fixed_epsilon > 0.0) {
        em.epsilon = options.fixed_epsilon;
        result.params = fit(ensemble, em).params;
        report.epsilon = options.fixed_epsilon;
    } else {
        const auto grid =
            options.epsilon_grid.empty() ? default_epsilon_grid() : options.epsilon_grid;
        const auto scan = scan_epsilon(ensemble, grid, em);
        result.params = scan.fits[scan.selected_index].params;
        report.epsilon = scan.selected_epsilon;
        report.scanned = true;
    }

    report.width = tests.front().width;
    report.height = tests.front().height;
    report.variable_count = static_cast<int>(result.partition.variable.size());
    report.train_count = static_cast<long>(train.size());

    const int num_tests =
        std::min<int>(options.num_test_images, static_cast<int>(tests.size()));
    const int total_pixels = result.partition.total_pixels;
    report.images.resize(num_tests);
    result.reconstructed.resize(num_tests);

    std::vector<char> variable_mask(total_pixels, 0);
    for (const int index : result.partition.variable) variable_mask[index] = 1;
    std::vector<std::int8_t> baseline_fill(total_pixels, 0);
    for (const auto& [index, value] : result.partition.stable) baseline_fill[index] = value;
    for (std::size_t v = 0; v < result.partition.variable.size(); ++v) {
        baseline_fill[result.partition.variable[v]] = result.partition.variable_majority[v];
    }

    parallel_for(static_cast<std::size_t>(num_tests), [&](std::size_t t) {
        const BinaryImage& original = tests[t];
        Rng rng = Rng(options.seed).child(0x2000 + t);

        // Knock out `missing_pixels` distinct pixels, anywhere in the image.
        std::vector<int> order(total_pixels);
        for (int i = 0; i < total_pixels; ++i) order[i] = i;
        for (int i = 0; i < options.missing_pixels && i < total_pixels; ++i) {
            const int j = i + static_cast<int>(rng.below(total_pixels - i));
            std::swap(order[i], order[j]);
        }
        BinaryImage damaged = original;
        ReconImageResult& image_result = report.images[t];
        image_result.image_index = static_cast<int>(t);
        for (int i = 0; i < options.missing_pixels && i < total_pixels; ++i) {
            damaged.pixels[order[i]] = 0;
            ++image_result.missing_total;
            if (variable_mask[order[i]]) ++image_result.missing_variable;
        }

        auto stats = reconstruct_with_stats(damaged, result.partition, result.params);
        image_result.sweeps = stats.sweeps;
        for (int i = 0; i < image_result.missing_total; ++i) {
            const int pixel = order[i];
            if (stats.image.pixels[pixel] == original.pixels[pixel]) {
                ++image_result.correct_model;
            }
            if (baseline_fill[pixel] == original.pixels[pixel]) {
                ++image_result.correct_baseline;
            }
        }
        result.reconstructed[t] = std::move(stats.image);
    });

    long missing = 0, model_correct = 0, baseline_correct = 0;
    for (const auto& image_result : report.images) {
        missing += image_result.missing_total;
        model_correct += image_result.correct_model;
        baseline_correct += image_result.correct_baseline;
    }
    report.model_accuracy = missing ? static_cast<double>(model_correct) / missing : 0.0;
    report.baseline_accuracy =
        missing ? static_cast<double>(baseline_correct) / missing : 0.0;
    return result;
}

}  // namespace emach
