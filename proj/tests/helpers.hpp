#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tsrate/rng.hpp"
#include "tsrate/types.hpp"

namespace testutil {

// Scratch directory that is wiped on construction and removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name)
        : path_(std::filesystem::temp_directory_path() / ("tsrate_test_" + name)) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path);
    f << content;
}

struct SyntheticSpec {
    std::size_t entities = 6;
    std::size_t industries = 3;
    std::size_t days = 270;
    std::uint64_t seed = 7;
};

// Random-walk price fixture: entity i belongs to industry i % industries,
// price levels differ per entity so industry groups are distinguishable.
inline void write_synthetic_dataset(const SyntheticSpec& spec,
                                    const std::string& price_path,
                                    const std::string& meta_path) {
    static const char* kIndustryNames[] = {"tech", "pharma", "finance",
                                           "energy", "retail", "transport"};
    std::ofstream meta(meta_path);
    meta << "entity_id,industry\n";
    std::ofstream prices(price_path);
    prices << "date,entity_id,adj_close\n";
    for (std::size_t e = 0; e < spec.entities; ++e) {
        const std::string entity = "ENT" + std::to_string(e);
        meta << entity << "," << kIndustryNames[e % spec.industries] << "\n";
        tsrate::RngStream stream(spec.seed, entity);
        double level = 50.0 + 40.0 * static_cast<double>(e);
        for (std::size_t day = 0; day < spec.days; ++day) {
            level = std::max(1.0, level + stream.normal(0.0, 1.5));
            // Synthetic calendar: year 2020 + 31-day "months", lexically sorted.
            char date[32];
            std::snprintf(date, sizeof(date), "2020-%02zu-%02zu", 1 + day / 31,
                          1 + day % 31);
            prices << date << "," << entity << "," << level << "\n";
        }
    }
}

inline std::vector<double> random_series(std::size_t n, tsrate::RngStream& stream,
                                         double lo = 1.0, double hi = 100.0) {
    std::vector<double> out(n);
    for (auto& v : out) v = stream.uniform(lo, hi);
    return out;
}

}  // namespace testutil
