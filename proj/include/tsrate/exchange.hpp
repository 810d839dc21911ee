#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tsrate/csv.hpp"
#include "tsrate/error.hpp"
#include "tsrate/perturb.hpp"
#include "tsrate/types.hpp"

// Line-delimited exchange formats for external forecasters and sentiment
// providers. Writers emit numbers with %.17g so values round-trip exactly.

namespace tsrate {

struct ManifestEntry {
    std::string window_id;
    PerturbationId perturbation = PerturbationId::P0;
    std::string input_csv;  // workspace-relative
    std::string image_png;  // workspace-relative; empty when no image applies
};

inline std::string manifest_line(const ManifestEntry& e) {
    nlohmann::json j;
    j["window_id"] = e.window_id;
    j["perturbation"] = to_string(e.perturbation);
    j["input_csv"] = e.input_csv;
    j["image_png"] = e.image_png;
    return j.dump();
}

// Writes the manifest plus one numeric input file per window, ordered by
// window_id. image_path_of may return an empty string for windows without an
// image variant.
template <typename ImagePathFn>
inline std::filesystem::path export_windows_for_external(
    const std::vector<WindowSample>& windows, const std::filesystem::path& out_dir,
    ImagePathFn image_path_of) {
    std::filesystem::create_directories(out_dir / "inputs");
    std::vector<const WindowSample*> ordered;
    ordered.reserve(windows.size());
    for (const auto& w : windows) ordered.push_back(&w);
    std::sort(ordered.begin(), ordered.end(),
              [](const WindowSample* a, const WindowSample* b) {
                  return a->window_id < b->window_id;
              });

    const std::filesystem::path manifest_path = out_dir / "manifest.jsonl";
    std::ofstream manifest(manifest_path);
    if (!manifest) fail_io("cannot write " + manifest_path.string());
    for (const WindowSample* w : ordered) {
        const std::string input_rel = "exchange/inputs/" + w->window_id + ".csv";
        const std::filesystem::path input_path = out_dir / "inputs" / (w->window_id + ".csv");
        std::ofstream input(input_path);
        if (!input) fail_io("cannot write " + input_path.string());
        for (double v : w->input) input << format_double(v) << "\n";
        if (!input) fail_io("short write to " + input_path.string());

        ManifestEntry entry;
        entry.window_id = w->window_id;
        entry.perturbation = w->perturbation;
        entry.input_csv = input_rel;
        entry.image_png = image_path_of(*w);
        manifest << manifest_line(entry) << "\n";
    }
    if (!manifest) fail_io("short write to " + manifest_path.string());
    return manifest_path;
}

// Known-window index used to validate imported predictions.
struct WindowIndex {
    std::map<std::string, PerturbationId> perturbation_of;
    std::size_t horizon = 0;
};

inline WindowIndex make_window_index(const std::vector<WindowSample>& windows,
                                     std::size_t horizon) {
    WindowIndex index;
    index.horizon = horizon;
    for (const auto& w : windows) index.perturbation_of[w.window_id] = w.perturbation;
    return index;
}

// Parses `{"window_id", "perturbation", "predictions": [...]}` lines.
// Unknown windows, mismatched perturbations, wrong horizon, non-finite
// values and duplicate (window_id, perturbation) pairs are all reported with
// their line number.
inline std::vector<ForecastRecord> import_external_predictions(
    const std::string& path, const std::string& system_id, const WindowIndex& index) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open predictions file: " + path);
    std::vector<ForecastRecord> records;
    std::set<std::pair<std::string, PerturbationId>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            fail_validation("bad prediction record at " + where);
        if (!j.contains("window_id") || !j.contains("perturbation") ||
            !j.contains("predictions") || !j["predictions"].is_array())
            fail_validation("prediction record missing fields at " + where);

        ForecastRecord rec;
        rec.system_id = system_id;
        rec.window_id = j["window_id"].get<std::string>();
        rec.perturbation = parse_perturbation(j["perturbation"].get<std::string>());

        const auto it = index.perturbation_of.find(rec.window_id);
        if (it == index.perturbation_of.end())
            fail_validation("unknown window_id '" + rec.window_id + "' at " + where);
        if (it->second != rec.perturbation)
            fail_validation("perturbation mismatch for window '" + rec.window_id +
                            "' at " + where);
        if (!seen.emplace(rec.window_id, rec.perturbation).second)
            fail_validation("duplicate record for window '" + rec.window_id + "' at " +
                            where);
        for (const auto& v : j["predictions"]) {
            if (!v.is_number())
                fail_validation("non-numeric prediction at " + where);
            const double value = v.get<double>();
            if (!std::isfinite(value))
                fail_validation("non-finite prediction at " + where);
            rec.predictions.push_back(value);
        }
        if (rec.predictions.size() != index.horizon)
            fail_validation("expected " + std::to_string(index.horizon) +
                            " predictions, got " + std::to_string(rec.predictions.size()) +
                            " at " + where);
        records.push_back(std::move(rec));
    }
    return records;
}

inline void write_forecast_records(const std::vector<ForecastRecord>& records,
                                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    for (const auto& r : records) {
        out << "{\"window_id\":\"" << r.window_id << "\",\"perturbation\":\""
            << to_string(r.perturbation) << "\",\"predictions\":[";
        for (std::size_t i = 0; i < r.predictions.size(); ++i) {
            if (i) out << ",";
            out << format_double(r.predictions[i]);
        }
        out << "]}\n";
    }
    if (!out) fail_io("short write to " + path.string());
}

// Sentiment labels keyed by the control (P0) window id. Every required id
// must be present; missing ids are listed in the error.
inline std::map<std::string, SentimentLabel> read_sentiment_file(
    const std::string& path, const std::set<std::string>& required_ids) {
    std::ifstream in(path);
    if (!in) fail_io("cannot open sentiment file: " + path);
    std::map<std::string, SentimentLabel> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("window_id") ||
            !j.contains("label") || !j["label"].is_number_integer())
            fail_validation("bad sentiment record at " + where);
        labels[j["window_id"].get<std::string>()] =
            sentiment_from_int(j["label"].get<int>());
    }
    std::string missing;
    std::size_t missing_count = 0;
    for (const auto& id : required_ids) {
        if (!labels.count(id)) {
            ++missing_count;
            if (missing_count <= 10) missing += (missing.empty() ? "" : ", ") + id;
        }
    }
    if (missing_count > 0)
        fail_validation("sentiment file " + path + " is missing " +
                        std::to_string(missing_count) + " window ids: " + missing +
                        (missing_count > 10 ? ", ..." : ""));
    return labels;
}

}  // namespace tsrate
