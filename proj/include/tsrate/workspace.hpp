#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tsrate/csv.hpp"
#include "tsrate/error.hpp"
#include "tsrate/types.hpp"

namespace tsrate {

// Workspace layout: every intermediate is inspectable text or PNG.
//   windows/    numeric window tables + entity stats
//   images/     rendered spectrograms per window and image perturbation
//   exchange/   manifest + per-window inputs for external forecasters
//   forecasts/  one prediction file per system
//   analysis/   residuals, accuracy, hypothesis tests, causal results, scores
//   reports/    rating tables
struct Workspace {
    std::filesystem::path root;

    explicit Workspace(const std::string& dir) : root(dir) {}

    std::filesystem::path windows_dir() const { return root / "windows"; }
    std::filesystem::path images_dir() const { return root / "images"; }
    std::filesystem::path exchange_dir() const { return root / "exchange"; }
    std::filesystem::path forecasts_dir() const { return root / "forecasts"; }
    std::filesystem::path analysis_dir() const { return root / "analysis"; }
    std::filesystem::path reports_dir() const { return root / "reports"; }
    std::filesystem::path lock_file() const { return root / "run.lock"; }

    std::filesystem::path windows_csv(PerturbationId p) const {
        return windows_dir() / (std::string("windows_") + to_string(p) + ".csv");
    }
    std::string image_name(const WindowSample& w) const {
        return w.window_id + "_" + to_string(w.perturbation) + ".png";
    }
};

// Stage outputs are regenerated from scratch so reruns with the same config
// are byte-identical regardless of what a previous run left behind.
inline void reset_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
    std::filesystem::create_directories(dir);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << content;
    if (!out) fail_io("short write to " + path.string());
}

// Static-chunk parallel loop. Each index owns its output slot, so results do
// not depend on the worker count or interleaving.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Window table persistence: one CSV per numeric variant with one column per
// input/truth element.

inline void write_windows_csv(const std::vector<WindowSample>& windows,
                              std::size_t n, std::size_t d,
                              const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << "window_id,entity_id,industry,t_index,perturbation";
    for (std::size_t i = 0; i < n; ++i) out << ",input_" << i;
    for (std::size_t i = 0; i < d; ++i) out << ",truth_" << i;
    out << "\n";
    for (const auto& w : windows) {
        out << w.window_id << "," << w.entity_id << "," << w.industry << ","
            << w.t_index << "," << to_string(w.perturbation);
        for (double v : w.input) out << "," << format_double(v);
        for (double v : w.truth) out << "," << format_double(v);
        out << "\n";
    }
    if (!out) fail_io("short write to " + path.string());
}

inline std::vector<WindowSample> read_windows_csv(const std::filesystem::path& path,
                                                  std::size_t n, std::size_t d) {
    const auto rows = read_csv(path.string());
    if (rows.empty()) fail_validation("window table " + path.string() + " is empty");
    const std::size_t expected_cols = 5 + n + d;
    if (rows[0].size() != expected_cols)
        fail_validation("window table " + path.string() +
                        " does not match the configured n and d");
    std::vector<WindowSample> windows;
    windows.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = path.string() + " row " + std::to_string(r + 1);
        if (row.size() != expected_cols) fail_validation("malformed " + where);
        WindowSample w;
        w.window_id = row[0];
        w.entity_id = row[1];
        w.industry = row[2];
        w.t_index = static_cast<std::size_t>(parse_long(row[3], where));
        w.perturbation = parse_perturbation(row[4]);
        w.input.reserve(n);
        w.truth.reserve(d);
        for (std::size_t i = 0; i < n; ++i) w.input.push_back(parse_double(row[5 + i], where));
        for (std::size_t i = 0; i < d; ++i)
            w.truth.push_back(parse_double(row[5 + n + i], where));
        windows.push_back(std::move(w));
    }
    return windows;
}

struct EntityStats {
    std::string entity_id;
    std::string industry;
    double min_price = 0.0;
    double max_price = 0.0;
    std::size_t length = 0;
};

inline void write_entity_stats(const std::vector<EntityStats>& stats,
                               const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << "entity_id,industry,min_price,max_price,length\n";
    for (const auto& s : stats)
        out << s.entity_id << "," << s.industry << "," << format_double(s.min_price)
            << "," << format_double(s.max_price) << "," << s.length << "\n";
}

inline std::map<std::string, EntityStats> read_entity_stats(
    const std::filesystem::path& path) {
    const auto rows = read_csv(path.string());
    std::map<std::string, EntityStats> stats;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 5)
            fail_validation("malformed entity stats row in " + path.string());
        EntityStats s;
        s.entity_id = row[0];
        s.industry = row[1];
        s.min_price = parse_double(row[2], path.string());
        s.max_price = parse_double(row[3], path.string());
        s.length = static_cast<std::size_t>(parse_long(row[4], path.string()));
        stats[s.entity_id] = s;
    }
    return stats;
}

// Canonical processing order: perturbation, then entity, then time.
inline void sort_canonical(std::vector<WindowSample>& windows) {
    std::sort(windows.begin(), windows.end(),
              [](const WindowSample& a, const WindowSample& b) {
                  if (a.perturbation != b.perturbation) return a.perturbation < b.perturbation;
                  if (a.entity_id != b.entity_id) return a.entity_id < b.entity_id;
                  return a.t_index < b.t_index;
              });
}

}  // namespace tsrate
