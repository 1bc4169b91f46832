#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "emach/recon.hpp"
#include "support/glyphs.hpp"
#include "support/oracles.hpp"

using namespace emach;
using doctest::Approx;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
    auto path = std::filesystem::temp_directory_path() / ("emach_test_" + tag);
    std::filesystem::create_directories(path);
    return path;
}

// Best assignment of the missing variable pixels by exhaustive enumeration.
double exhaustive_best_objective(const BinaryImage& damaged, const PixelPartition& partition,
                                 const ParameterVector& params) {
    const int m = params.num_spins;
    std::vector<double> signs(m);
    std::vector<int> missing;
    for (int v = 0; v < m; ++v) {
        const auto pixel = damaged.pixels[partition.variable[v]];
        if (pixel == 0) {
            missing.push_back(v);
            signs[v] = -1.0;
        } else {
            signs[v] = pixel;
        }
    }
    const auto coupling = params.coupling_matrix();
    const auto objective = [&] {
        double value = 0.0;
        for (int v = 0; v < m; ++v) {
            value += params.w[v] * signs[v];
            for (int k = v + 1; k < m; ++k) value += coupling(v, k) * signs[v] * signs[k];
        }
        return value;
    };
    double best = -std::numeric_limits<double>::infinity();
    const std::uint64_t total = 1ULL << missing.size();
    for (std::uint64_t bits = 0; bits < total; ++bits) {
        for (std::size_t b = 0; b < missing.size(); ++b) {
            signs[missing[b]] = (bits >> b) & 1 ? 1.0 : -1.0;
        }
        best = std::max(best, objective());
    }
    return best;
}

double icm_objective(const BinaryImage& reconstructed, const PixelPartition& partition,
                     const ParameterVector& params) {
    const int m = params.num_spins;
    const auto coupling = params.coupling_matrix();
    double value = 0.0;
    for (int v = 0; v < m; ++v) {
        const double sv = reconstructed.pixels[partition.variable[v]];
        value += params.w[v] * sv;
        for (int k = v + 1; k < m; ++k) {
            value += coupling(v, k) * sv * reconstructed.pixels[partition.variable[k]];
        }
    }
    return value;
}

}  // namespace

TEST_CASE("binarize uses a strict threshold") {
    GrayImage raw{3, 1, {0, 1, 2}};
    const auto image = binarize(raw);
    CHECK(image.pixels[0] == -1);
    CHECK(image.pixels[1] == -1);
    CHECK(image.pixels[2] == +1);

    GrayImage zeros{4, 2, std::vector<std::uint8_t>(8, 0)};
    for (const auto pixel : binarize(zeros).pixels) CHECK(pixel == -1);
    GrayImage full{4, 2, std::vector<std::uint8_t>(8, 255)};
    for (const auto pixel : binarize(full).pixels) CHECK(pixel == +1);
}

TEST_CASE("pixel partition") {
    // Four pixels: always +1; always -1; 50/50; exactly at the threshold.
    std::vector<BinaryImage> train;
    for (int s = 0; s < 10; ++s) {
        BinaryImage image{4, 1, {+1, -1, 0, 0}};
        image.pixels[2] = s < 5 ? +1 : -1;
        image.pixels[3] = s < 8 ? +1 : -1;  // exactly 80%
        train.push_back(image);
    }
    const auto partition = partition_pixels(train, 0.8);
    REQUIRE(partition.stable.size() == 2);
    CHECK(partition.stable[0].index == 0);
    CHECK(partition.stable[0].value == +1);
    CHECK(partition.stable[1].index == 1);
    CHECK(partition.stable[1].value == -1);
    REQUIRE(partition.variable == std::vector<int>{2, 3});
    CHECK(partition.variable_majority[0] == +1);  // exact tie goes to +1
    CHECK(partition.variable_majority[1] == +1);

    CHECK_THROWS_AS(partition_pixels({}, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(partition_pixels(train, 0.5), std::invalid_argument);
}

TEST_CASE("reconstruct") {
    // A small hand-built model over 3 variable pixels in a 5-pixel image.
    std::vector<BinaryImage> train;
    Rng rng(5);
    for (int s = 0; s < 40; ++s) {
        BinaryImage image{5, 1, {+1, 0, 0, 0, -1}};
        const int core = rng.uniform() < 0.7 ? +1 : -1;
        image.pixels[1] = core;
        image.pixels[2] = rng.uniform() < 0.8 ? core : -core;
        image.pixels[3] = rng.uniform() < 0.6 ? -core : core;
        train.push_back(image);
    }
    const auto partition = partition_pixels(train, 0.8);
    REQUIRE(partition.variable.size() == 3);
    const auto ensemble = variable_pixel_ensemble(train, partition);
    EmConfig em{.epsilon = 0.7, .max_iters = 5000, .tol = 1e-8, .seed = 6};
    const auto params = fit(ensemble, em).params;

    SUBCASE("no missing pixels is the identity") {
        const BinaryImage test{5, 1, {+1, +1, -1, +1, -1}};
        const auto restored = reconstruct(test, partition, params);
        CHECK(restored.pixels == test.pixels);
    }
    SUBCASE("a single missing variable pixel is the exact conditional argmax") {
        for (const std::int8_t others : {std::int8_t(-1), std::int8_t(+1)}) {
            BinaryImage test{5, 1, {+1, 0, others, others, -1}};
            const auto restored = reconstruct(test, partition, params);
            // Two-state oracle: evaluate w.O at both candidate values.
            BinaryImage plus = test, minus = test;
            plus.pixels[1] = +1;
            minus.pixels[1] = -1;
            const double objective_plus = icm_objective(plus, partition, params);
            const double objective_minus = icm_objective(minus, partition, params);
            const std::int8_t expected = objective_plus >= objective_minus ? +1 : -1;
            CHECK(restored.pixels[1] == expected);
        }
    }
    SUBCASE("missing stable pixels take the stored fill value") {
        BinaryImage test{5, 1, {0, +1, -1, +1, 0}};
        const auto restored = reconstruct(test, partition, params);
        CHECK(restored.pixels[0] == +1);
        CHECK(restored.pixels[4] == -1);
    }
    SUBCASE("dimension mismatch is rejected") {
        const BinaryImage test{5, 1, {+1, 0, -1, +1, -1}};
        CHECK_THROWS_AS(reconstruct(test, partition, ParameterVector::zero(2)),
                        std::invalid_argument);
    }
    SUBCASE("deterministic output and no zeros remain") {
        BinaryImage test{5, 1, {0, 0, 0, 0, 0}};
        const auto once = reconstruct(test, partition, params);
        const auto twice = reconstruct(test, partition, params);
        CHECK(once.pixels == twice.pixels);
        for (const auto pixel : once.pixels) CHECK(pixel != 0);
    }
}

TEST_CASE("icm objective never decreases and terminates") {
    const auto glyphs = testsupport::make_glyph_set(150, 0, 900);
    std::vector<BinaryImage> train;
    for (const auto& raw : glyphs.images) train.push_back(binarize(raw));
    const auto partition = partition_pixels(train, 0.8);
    const auto ensemble = variable_pixel_ensemble(train, partition);
    EmConfig em{.epsilon = 0.5, .max_iters = 3000, .tol = 1e-6, .seed = 7};
    const auto params = fit(ensemble, em).params;

    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        BinaryImage damaged = train[trial];
        for (int k = 0; k < 40; ++k) {
            damaged.pixels[rng.below(damaged.size())] = 0;
        }
        const auto stats = reconstruct_with_stats(damaged, partition, params);
        CHECK(stats.sweeps <= 100);
        for (std::size_t i = 1; i < stats.objective_trace.size(); ++i) {
            CHECK(stats.objective_trace[i] >= stats.objective_trace[i - 1] - 1e-12);
        }
    }
}

TEST_CASE("icm reaches the exhaustive optimum on most small cases") {
    const auto glyphs = testsupport::make_glyph_set(200, 0, 901);
    std::vector<BinaryImage> train;
    for (const auto& raw : glyphs.images) train.push_back(binarize(raw));
    const auto partition = partition_pixels(train, 0.8);
    const auto ensemble = variable_pixel_ensemble(train, partition);
    EmConfig em{.epsilon = 0.5, .max_iters = 3000, .tol = 1e-6, .seed = 9};
    const auto params = fit(ensemble, em).params;

    Rng rng(10);
    int matched = 0;
    const int trials = 30;
    for (int trial = 0; trial < trials; ++trial) {
        BinaryImage damaged = train[trial % train.size()];
        // Knock out up to 12 variable pixels (and a few stable ones).
        int knocked = 0;
        while (knocked < 12) {
            const int v =
                partition.variable[rng.below(partition.variable.size())];
            if (damaged.pixels[v] != 0) {
                damaged.pixels[v] = 0;
                ++knocked;
            }
        }
        const auto stats = reconstruct_with_stats(damaged, partition, params);
        const double icm = icm_objective(stats.image, partition, params);
        const double best = exhaustive_best_objective(damaged, partition, params);
        if (icm >= best - 1e-9) ++matched;
    }
    // ICM is a local method; it must reach the global optimum on at least
    // 90% of cases at this size.
    CHECK(matched >= trials * 9 / 10);
}

TEST_CASE("idx round trip and validation") {
    const auto dir = temp_dir("idx");
    const auto glyphs = testsupport::make_glyph_set(6, 3, 902);
    const auto image_path = (dir / "images.idx3-ubyte").string();
    const auto label_path = (dir / "labels.idx1-ubyte").string();
    write_idx_images(image_path, glyphs.images);
    write_idx_labels(label_path, glyphs.labels);

    const auto images = read_idx_images(image_path);
    const auto labels = read_idx_labels(label_path);
    REQUIRE(images.size() == 9);
    REQUIRE(labels.size() == 9);
    CHECK(images[0].width == testsupport::kGlyphSide);
    CHECK(images[0].pixels == glyphs.images[0].pixels);
    CHECK(labels[8] == 3);

    CHECK_THROWS_AS(read_idx_images(label_path), std::invalid_argument);
    CHECK_THROWS_AS(read_idx_labels(image_path), std::invalid_argument);
    CHECK_THROWS_AS(read_idx_images((dir / "missing.idx").string()), std::invalid_argument);
}

TEST_CASE("pgm bytes") {
    const auto dir = temp_dir("pgm");
    const BinaryImage image{2, 2, {+1, -1, -1, +1}};
    const auto path = (dir / "img.pgm").string();
    write_pgm(path, image);
    std::ifstream in(path, std::ios::binary);
    std::string contents((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
    CHECK(contents == std::string("P5\n2 2\n255\n\xff\x00\x00\xff", 15));

    const BinaryImage with_hole{2, 1, {+1, 0}};
    CHECK_THROWS_AS(write_pgm((dir / "bad.pgm").string(), with_hole),
                    std::invalid_argument);
}

TEST_CASE("glyph pipeline end to end") {
    const auto train_set = testsupport::make_glyph_set(300, 0, 903);
    const auto test_set = testsupport::make_glyph_set(12, 0, 904);
    std::vector<BinaryImage> train, tests;
    for (const auto& raw : train_set.images) train.push_back(binarize(raw));
    for (const auto& raw : test_set.images) tests.push_back(binarize(raw));

    ReconOptions options;
    options.missing_pixels = 40;
    options.num_test_images = 12;
    options.seed = 905;
    options.fixed_epsilon = 0.5;
    options.em = EmConfig{.max_iters = 3000, .tol = 1e-6};
    const auto result = run_recon_pipeline(train, tests, options);

    CHECK(result.report.variable_count > 20);
    CHECK(result.report.variable_count < 200);
    CHECK(result.report.images.size() == 12);
    for (const auto& image : result.report.images) {
        CHECK(image.missing_total == 40);
    }
    CHECK(result.report.model_accuracy > 0.5);
    CHECK(result.report.model_accuracy >= result.report.baseline_accuracy - 0.05);
    for (const auto& image : result.reconstructed) {
        for (const auto pixel : image.pixels) CHECK(pixel != 0);
    }

    // Deterministic end to end.
    const auto again = run_recon_pipeline(train, tests, options);
    CHECK(again.report.model_accuracy == result.report.model_accuracy);
    for (std::size_t i = 0; i < result.reconstructed.size(); ++i) {
        CHECK(again.reconstructed[i].pixels == result.reconstructed[i].pixels);
    }
}
