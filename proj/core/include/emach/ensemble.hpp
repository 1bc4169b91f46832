#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "emach/spin.hpp"

namespace emach {

// Deduplicated observations: unique configurations with counts and
// frequencies f = n/N, held in canonical (packed-word) order. Copies are
// cheap shared handles; the payload is immutable after construction, so
// ensembles can be shared freely across threads.
//
// spin_matrix() exposes the unique configurations as a U x M matrix of
// +-1 doubles; every expectation in the project reduces to matrix
// products against it, which keeps all sums at O(U * L) cost.
class ObservationEnsemble {
public:
    ObservationEnsemble() = default;
    ObservationEnsemble(int num_spins,
                        std::vector<std::pair<SpinConfiguration, long>> counted);

    static ObservationEnsemble from_samples(int num_spins,
                                            const std::vector<SpinConfiguration>& samples);

    int num_spins() const { return data_->num_spins; }
    long total_count() const { return data_->total_count; }   // N
    int unique_count() const {                                 // U
        return static_cast<int>(data_->configs.size());
    }

    const SpinConfiguration& config(int u) const { return data_->configs[u]; }
    long count(int u) const { return data_->counts[u]; }
    const Eigen::VectorXd& frequencies() const { return data_->frequencies; }
    const Eigen::VectorXd& log_frequencies() const { return data_->log_frequencies; }
    const Eigen::MatrixXd& spin_matrix() const { return data_->spins; }

    bool operator==(const ObservationEnsemble& other) const;

private:
    struct Data {
        int num_spins = 0;
        long total_count = 0;
        std::vector<SpinConfiguration> configs;
        std::vector<long> counts;
        Eigen::VectorXd frequencies;
        Eigen::VectorXd log_frequencies;
        Eigen::MatrixXd spins;  // U x M, entries +-1
    };
    std::shared_ptr<const Data> data_;
};

// Observed support with re-weighted frequencies for some (w, epsilon).
// Weights are nonnegative and sum to 1 over the observed support.
struct ReweightedEnsemble {
    ObservationEnsemble base;
    Eigen::VectorXd weights;
};

// "spins-v1" dataset format: header line "M N", then one line per unique
// configuration, "count s_0 .. s_{M-1}" with tokens -1 or 1 (or +1).
ObservationEnsemble read_spins_v1(std::istream& in);
ObservationEnsemble read_spins_v1_file(const std::string& path);
void write_spins_v1(std::ostream& out, const ObservationEnsemble& ensemble);
void write_spins_v1_file(const std::string& path, const ObservationEnsemble& ensemble);

}  // namespace emach
