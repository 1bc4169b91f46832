#include "emach/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace emach {

ObservationEnsemble::ObservationEnsemble(
    int num_spins, std::vector<std::pair<SpinConfiguration, long>> counted) {
    if (num_spins < 1) throw std::invalid_argument("ensemble: M must be >= 1");
    if (counted.empty()) throw std::invalid_argument("ensemble: no observations");

    std::sort(counted.begin(), counted.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    auto data = std::make_shared<Data>();
    data->num_spins = num_spins;
    const int unique = static_cast<int>(counted.size());
    data->configs.reserve(unique);
    data->counts.reserve(unique);
    data->spins.resize(unique, num_spins);

    for (int u = 0; u < unique; ++u) {
        auto& [config, count] = counted[u];
        if (config.num_spins() != num_spins) {
            throw std::invalid_argument("ensemble: configuration width mismatch");
        }
        if (count < 1) throw std::invalid_argument("ensemble: counts must be >= 1");
        if (u > 0 && config == data->configs.back()) {
            throw std::invalid_argument("ensemble: duplicate configuration");
        }
        for (int i = 0; i < num_spins; ++i) {
            data->spins(u, i) = static_cast<double>(config.spin(i));
        }
        data->total_count += count;
        data->counts.push_back(count);
        data->configs.push_back(std::move(config));
    }

    data->frequencies.resize(unique);
    data->log_frequencies.resize(unique);
    const double n = static_cast<double>(data->total_count);
    for (int u = 0; u < unique; ++u) {
        const double f = static_cast<double>(data->counts[u]) / n;
        data->frequencies[u] = f;
        data->log_frequencies[u] = std::log(f);
    }
    data_ = std::move(data);
}

ObservationEnsemble ObservationEnsemble::from_samples(
    int num_spins, const std::vector<SpinConfiguration>& samples) {
    std::unordered_map<SpinConfiguration, long, SpinConfigurationHash> histogram;
    histogram.reserve(samples.size());
    for (const auto& sample : samples) ++histogram[sample];

    std::vector<std::pair<SpinConfiguration, long>> counted;
    counted.reserve(histogram.size());
    for (auto& [config, count] : histogram) counted.emplace_back(config, count);
    return ObservationEnsemble(num_spins, std::move(counted));
}

bool ObservationEnsemble::operator==(const ObservationEnsemble& other) const {
    if (data_ == other.data_) return true;
    if (!data_ || !other.data_) return false;
    return data_->num_spins == other.data_->num_spins &&
           data_->counts == other.data_->counts && data_->configs == other.data_->configs;
}

ObservationEnsemble read_spins_v1(std::istream& in) {
    int num_spins = 0;
    long total = 0;
    if (!(in >> num_spins >> total)) {
        throw std::invalid_argument("spins-v1: malformed header, expected 'M N'");
    }
    if (num_spins < 1) throw std::invalid_argument("spins-v1: M must be >= 1");

    std::vector<std::pair<SpinConfiguration, long>> counted;
    long running = 0;
    while (running < total) {
        long count = 0;
        if (!(in >> count)) throw std::invalid_argument("spins-v1: truncated file");
        SpinConfiguration config(num_spins);
        for (int i = 0; i < num_spins; ++i) {
            int token = 0;
            if (!(in >> token)) throw std::invalid_argument("spins-v1: truncated row");
            if (token != -1 && token != 1) {
                throw std::invalid_argument("spins-v1: spin token must be -1 or +1, got " +
                                            std::to_string(token));
            }
            config.set_spin(i, token);
        }
        running += count;
        counted.emplace_back(std::move(config), count);
    }
    if (running != total) {
        throw std::invalid_argument("spins-v1: counts sum to " + std::to_string(running) +
                                    ", header says " + std::to_string(total));
    }
    return ObservationEnsemble(num_spins, std::move(counted));
}

ObservationEnsemble read_spins_v1_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open dataset: " + path);
    return read_spins_v1(in);
}

void write_spins_v1(std::ostream& out, const ObservationEnsemble& ensemble) {
    out << ensemble.num_spins() << ' ' << ensemble.total_count() << '\n';
    for (int u = 0; u < ensemble.unique_count(); ++u) {
        out << ensemble.count(u);
        const auto& config = ensemble.config(u);
        for (int i = 0; i < ensemble.num_spins(); ++i) out << ' ' << config.spin(i);
        out << '\n';
    }
}

void write_spins_v1_file(const std::string& path, const ObservationEnsemble& ensemble) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write dataset: " + path);
    write_spins_v1(out, ensemble);
}

}  // namespace emach
