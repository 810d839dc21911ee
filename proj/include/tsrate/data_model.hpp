#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "tsrate/csv.hpp"
#include "tsrate/error.hpp"
#include "tsrate/types.hpp"

namespace tsrate {

// Loads the price table (`date,entity_id,adj_close`) joined with the entity
// metadata (`entity_id,industry`). Rows are sorted by date per entity; dates
// are ISO-8601 strings compared lexically, which orders correctly without any
// calendar handling.
inline EntityTable load_price_table(const std::string& price_path,
                                    const std::string& meta_path) {
    auto meta_rows = read_csv(meta_path);
    if (meta_rows.empty() || meta_rows[0] != std::vector<std::string>{"entity_id", "industry"})
        fail_validation("metadata file " + meta_path +
                        " must start with header 'entity_id,industry'");
    std::map<std::string, std::string> industry_of;
    for (std::size_t i = 1; i < meta_rows.size(); ++i) {
        const auto& row = meta_rows[i];
        if (row.size() != 2)
            fail_validation("metadata row " + std::to_string(i + 1) + " malformed");
        if (!industry_of.emplace(row[0], row[1]).second)
            fail_validation("duplicate metadata entry for entity '" + row[0] + "'");
    }

    auto price_rows = read_csv(price_path);
    if (price_rows.empty() ||
        price_rows[0] != std::vector<std::string>{"date", "entity_id", "adj_close"})
        fail_validation("price file " + price_path +
                        " must start with header 'date,entity_id,adj_close'");

    struct Row {
        std::string date;
        double price;
        std::size_t line;
    };
    std::map<std::string, std::vector<Row>> by_entity;
    for (std::size_t i = 1; i < price_rows.size(); ++i) {
        const auto& row = price_rows[i];
        const std::string where = "line " + std::to_string(i + 1) + " of " + price_path;
        if (row.size() != 3) fail_validation("price row malformed at " + where);
        if (row[0].empty() || row[1].empty())
            fail_validation("missing date or entity_id at " + where);
        double price = parse_double(row[2], where);
        if (!std::isfinite(price) || price <= 0.0)
            fail_validation("non-positive or non-finite price " + row[2] + " at " + where);
        by_entity[row[1]].push_back({row[0], price, i + 1});
    }

    EntityTable table;
    for (auto& [entity_id, rows] : by_entity) {
        auto it = industry_of.find(entity_id);
        if (it == industry_of.end())
            fail_validation("entity '" + entity_id + "' has no industry mapping in " + meta_path);
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.date < b.date; });
        EntitySeries series;
        series.entity_id = entity_id;
        series.industry = it->second;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0 && rows[i].date == rows[i - 1].date)
                fail_validation("duplicate date " + rows[i].date + " for entity '" +
                                entity_id + "'");
            series.dates.push_back(rows[i].date);
            series.prices.push_back(rows[i].price);
        }
        table.entities.push_back(std::move(series));
    }
    return table;
}

struct WindowingResult {
    std::vector<WindowSample> windows;
    std::vector<std::string> warnings;  // entities skipped for short series
};

// Slides an n-input / d-truth window over each entity series. Windows start
// at t_index = n-1 and advance by `stride` while a full truth slice remains.
// Entities shorter than n+d are skipped with a warning, not an error, so
// multi-entity runs degrade gracefully.
inline WindowingResult make_windows(const EntityTable& table, std::size_t n,
                                    std::size_t d, std::size_t stride = 1) {
    if (n == 0 || d == 0) fail_validation("window sizes n and d must be positive");
    if (stride == 0) fail_validation("stride must be >= 1");
    WindowingResult result;
    for (const auto& entity : table.entities) {
        const std::size_t len = entity.prices.size();
        if (len < n + d) {
            result.warnings.push_back("entity '" + entity.entity_id + "' skipped: series length " +
                                      std::to_string(len) + " < " + std::to_string(n + d));
            continue;
        }
        for (std::size_t t = n - 1; t + d < len; t += stride) {
            WindowSample w;
            w.entity_id = entity.entity_id;
            w.industry = entity.industry;
            w.t_index = t;
            w.perturbation = PerturbationId::P0;
            w.window_id = make_window_id(entity.entity_id, t, PerturbationId::P0);
            w.input.assign(entity.prices.begin() + (t + 1 - n),
                           entity.prices.begin() + (t + 1));
            w.truth.assign(entity.prices.begin() + (t + 1),
                           entity.prices.begin() + (t + 1 + d));
            result.windows.push_back(std::move(w));
        }
    }
    return result;
}

// Same slicing applied to an already-perturbed copy of an entity's series;
// windows carry the given perturbation tag (and ids derived from it).
inline std::vector<WindowSample> make_windows_for_series(
    const EntitySeries& entity, const std::vector<double>& series, std::size_t n,
    std::size_t d, std::size_t stride, PerturbationId p) {
    std::vector<WindowSample> out;
    const std::size_t len = series.size();
    if (len < n + d) return out;
    for (std::size_t t = n - 1; t + d < len; t += stride) {
        WindowSample w;
        w.entity_id = entity.entity_id;
        w.industry = entity.industry;
        w.t_index = t;
        w.perturbation = p;
        w.window_id = make_window_id(entity.entity_id, t, p);
        w.input.assign(series.begin() + (t + 1 - n), series.begin() + (t + 1));
        w.truth.assign(series.begin() + (t + 1), series.begin() + (t + 1 + d));
        out.push_back(std::move(w));
    }
    return out;
}

struct Standardized {
    std::vector<double> scaled;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation; 0 for constant input
};

// Population (not sample) standard deviation: the result is only used for
// image scaling and the choice is fixed for determinism.
inline Standardized standardize(const std::vector<double>& values) {
    if (values.empty()) fail_validation("standardize: empty input");
    Standardized out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size()));
    out.scaled.resize(values.size(), 0.0);
    if (out.std > 0.0) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out.scaled[i] = (values[i] - out.mean) / out.std;
    }
    return out;
}

}  // namespace tsrate
