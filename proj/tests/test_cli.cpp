#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "emach/bench.hpp"
#include "emach/ensemble.hpp"
#include "emach/serialize.hpp"

using namespace emach;

namespace {

const std::string kCli = EMACH_CLI_PATH;

std::filesystem::path work_dir() {
    const auto path = std::filesystem::temp_directory_path() / "emach_cli_tests";
    std::filesystem::create_directories(path);
    return path;
}

int run(const std::string& args) {
    const std::string command = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("cli: generate writes a parseable dataset plus sidecar") {
    const auto dir = work_dir();
    const auto dataset = (dir / "gen.spins").string();
    REQUIRE(run("generate --M 8 --N 500 --preset weak --seed 3 --out " + dataset) == 0);

    const auto ensemble = read_spins_v1_file(dataset);
    CHECK(ensemble.num_spins() == 8);
    CHECK(ensemble.total_count() == 500);

    const auto sidecar = read_sidecar_file(dataset + ".json");
    CHECK(sidecar.truth.num_spins == 8);
    CHECK(sidecar.w_true.num_spins == 8);
    CHECK(sidecar.sampler.num_samples == 500);
}

TEST_CASE("cli: generate is byte-deterministic for a fixed seed") {
    const auto dir = work_dir();
    const auto a = (dir / "det_a.spins").string();
    const auto b = (dir / "det_b.spins").string();
    REQUIRE(run("generate --M 10 --N 2000 --preset strong --seed 11 --out " + a) == 0);
    REQUIRE(run("generate --M 10 --N 2000 --preset strong --seed 11 --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a + ".json") == slurp(b + ".json"));
}

TEST_CASE("cli: fit all methods and score against the sidecar") {
    const auto dir = work_dir();
    const auto dataset = (dir / "fit.spins").string();
    REQUIRE(run("generate --M 8 --N 2000 --preset weak --seed 5 --out " + dataset) == 0);

    for (const std::string method : {"em", "hopfield", "mle", "ple"}) {
        const auto out = (dir / ("fit_" + method + ".json")).string();
        const std::string epsilon = method == "em" ? " --epsilon 0.5" : "";
        CAPTURE(method);
        REQUIRE(run("fit --dataset " + dataset + " --method " + method + epsilon +
                    " --truth " + dataset + ".json --seed 6 --out " + out) == 0);
        const auto text = slurp(out);
        CHECK(text.find("\"method\": \"" + method + "\"") != std::string::npos);
        CHECK(text.find("\"mse_vs_truth\"") != std::string::npos);
    }
}

TEST_CASE("cli: fit reports are byte-identical after stripping timings") {
    const auto dir = work_dir();
    const auto dataset = (dir / "fit_det.spins").string();
    REQUIRE(run("generate --M 8 --N 1000 --preset weak --seed 7 --out " + dataset) == 0);
    const auto a = (dir / "fit_det_a.json").string();
    const auto b = (dir / "fit_det_b.json").string();
    const auto traj_a = (dir / "traj_a.csv").string();
    const auto traj_b = (dir / "traj_b.csv").string();
    REQUIRE(run("fit --dataset " + dataset + " --method em --epsilon 0.4 --seed 8 --out " +
                a + " --trajectory " + traj_a) == 0);
    REQUIRE(run("fit --dataset " + dataset + " --method em --epsilon 0.4 --seed 8 --out " +
                b + " --trajectory " + traj_b) == 0);
    CHECK(strip_timing_fields(slurp(a)) == strip_timing_fields(slurp(b)));
    CHECK(slurp(traj_a) == slurp(traj_b));
    CHECK(slurp(traj_a).rfind("iter,mean_energy\n", 0) == 0);
}

TEST_CASE("cli: scan selects an epsilon and reports a plateau") {
    const auto dir = work_dir();
    const auto dataset = (dir / "scan.spins").string();
    REQUIRE(run("generate --M 8 --N 2000 --preset strong --seed 9 --out " + dataset) == 0);
    const auto out = (dir / "scan.json").string();
    REQUIRE(run("scan --dataset " + dataset + " --grid 0.2:1.0:0.2 --seed 10 --out " + out) ==
            0);
    const auto text = slurp(out);
    CHECK(text.find("\"selected_epsilon\"") != std::string::npos);
    CHECK(text.find("\"plateau_width\"") != std::string::npos);
}

TEST_CASE("cli: bench csv round-trips and is deterministic modulo timing") {
    const auto dir = work_dir();
    const auto a = (dir / "bench_a.csv").string();
    const auto b = (dir / "bench_b.csv").string();
    const std::string args =
        "bench --sizes 6 --samples 300 --presets weak --methods em,hopfield "
        "--replicates 2 --seed 12 --grid 0.25:1.0:0.25 --out ";
    REQUIRE(run(args + a) == 0);
    REQUIRE(run(args + b) == 0);

    std::ifstream in_a(a), in_b(b);
    auto records_a = read_csv(in_a);
    auto records_b = read_csv(in_b);
    REQUIRE(records_a.size() == 4);
    for (std::size_t i = 0; i < records_a.size(); ++i) {
        records_a[i].seconds = records_b[i].seconds = 0.0;
        CHECK(records_a[i] == records_b[i]);
    }
}

TEST_CASE("cli: exit codes") {
    const auto dir = work_dir();
    SUBCASE("bad flag is an invalid-config error") {
        CHECK(run("fit --no-such-flag") == 2);
    }
    SUBCASE("missing dataset is an invalid-config error") {
        CHECK(run("fit --dataset /nonexistent.spins --method hopfield") == 2);
    }
    SUBCASE("em without epsilon is an invalid-config error") {
        const auto dataset = (dir / "codes.spins").string();
        REQUIRE(run("generate --M 6 --N 200 --preset weak --seed 1 --out " + dataset) == 0);
        CHECK(run("fit --dataset " + dataset + " --method em") == 2);
    }
    SUBCASE("mle above the enumeration cap is an invalid-config error") {
        const auto dataset = (dir / "codes_big.spins").string();
        REQUIRE(run("generate --M 30 --N 200 --preset weak --burn-in 50 --thinning 2 "
                    "--seed 2 --out " + dataset) == 0);
        CHECK(run("fit --dataset " + dataset + " --method mle") == 2);
    }
    SUBCASE("unknown preset is an invalid-config error") {
        CHECK(run("bench --presets nosuch --sizes 5 --samples 100") == 2);
    }
}
