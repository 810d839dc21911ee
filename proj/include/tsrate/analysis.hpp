#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsrate/causal.hpp"
#include "tsrate/config.hpp"
#include "tsrate/metrics.hpp"
#include "tsrate/rating.hpp"
#include "tsrate/workspace.hpp"

namespace tsrate {

// Metric family ids used in score tables and report names. Sign accuracy is
// bucketed with the same ascending rule as everything else, so there a higher
// rating means higher accuracy; every other family reads lower-is-better.
inline const std::vector<std::string>& metric_families() {
    static const std::vector<std::string> families{
        "WRS_I", "WRS_C", "PIE_I", "PIE_C", "APE_I",
        "APE_C", "SMAPE", "MASE",  "SignAcc"};
    return families;
}

inline ResidualRecord build_residual_record(const WindowSample& window,
                                            const ForecastRecord& forecast,
                                            const std::vector<double>& truth_p0,
                                            bool signed_rmax) {
    ResidualRecord rec;
    rec.window_id = window.window_id;
    rec.system_id = forecast.system_id;
    rec.perturbation = window.perturbation;
    rec.entity_id = window.entity_id;
    rec.industry = window.industry;
    const ResidualOutcome outcome =
        residual_outcome(forecast.predictions, truth_p0, signed_rmax);
    rec.residuals = outcome.residuals;
    rec.r_max = outcome.r_max;
    rec.smape = smape(truth_p0, forecast.predictions);
    rec.mase = mase(window.input, truth_p0, forecast.predictions);
    rec.sign_hit = sign_hit(forecast.predictions, truth_p0, window.input.back());
    return rec;
}

inline void write_residuals_csv(const std::vector<ResidualRecord>& records,
                                const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << "window_id,system,perturbation,entity_id,industry,r_max,smape,mase,sign_hit\n";
    for (const auto& r : records) {
        out << r.window_id << "," << r.system_id << "," << to_string(r.perturbation)
            << "," << r.entity_id << "," << r.industry << "," << format_double(r.r_max)
            << "," << format_double(r.smape) << ","
            << (r.mase ? format_double(*r.mase) : "NA") << ","
            << (r.sign_hit ? "1" : "0") << "\n";
    }
}

// ---------------------------------------------------------------------------
// Accuracy aggregates (SMAPE / MASE / sign accuracy), one row per system and
// perturbation, with NA rows for combinations a system did not produce.

struct AccuracyRow {
    std::string system_id;
    PerturbationId perturbation = PerturbationId::P0;
    std::size_t count = 0;
    double smape_mean = 0.0, smape_std = 0.0;
    double mase_mean = 0.0, mase_std = 0.0;
    std::size_t mase_excluded = 0;
    double sign_accuracy_pct = 0.0;  // percent
    bool available = false;
};

inline AccuracyRow aggregate_accuracy(const std::string& system_id, PerturbationId p,
                                      const std::vector<const ResidualRecord*>& records) {
    AccuracyRow row;
    row.system_id = system_id;
    row.perturbation = p;
    row.count = records.size();
    if (records.empty()) return row;
    row.available = true;

    auto mean_std = [](const std::vector<double>& xs) {
        double m = 0.0;
        for (double v : xs) m += v;
        m /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double v : xs) ss += (v - m) * (v - m);
        const double sd = xs.size() > 1
                              ? std::sqrt(ss / static_cast<double>(xs.size() - 1))
                              : 0.0;
        return std::pair<double, double>(m, sd);
    };

    std::vector<double> smapes, mases;
    std::size_t hits = 0;
    for (const ResidualRecord* r : records) {
        smapes.push_back(r->smape);
        if (r->mase)
            mases.push_back(*r->mase);
        else
            ++row.mase_excluded;
        hits += r->sign_hit ? 1 : 0;
    }
    std::tie(row.smape_mean, row.smape_std) = mean_std(smapes);
    if (!mases.empty()) std::tie(row.mase_mean, row.mase_std) = mean_std(mases);
    row.sign_accuracy_pct =
        100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
    return row;
}

inline void write_accuracy_csv(const std::vector<AccuracyRow>& rows,
                               const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << "system,perturbation,windows,smape_mean,smape_std,mase_mean,mase_std,"
           "mase_excluded,sign_accuracy_pct\n";
    for (const auto& r : rows) {
        out << r.system_id << "," << to_string(r.perturbation) << "," << r.count << ",";
        if (r.available) {
            out << format_double(r.smape_mean) << "," << format_double(r.smape_std) << ",";
            if (r.count > r.mase_excluded)
                out << format_double(r.mase_mean) << "," << format_double(r.mase_std);
            else
                out << "NA,NA";
            out << "," << r.mase_excluded << "," << format_double(r.sign_accuracy_pct);
        } else {
            out << "NA,NA,NA,NA,NA,NA";
        }
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Statistical bias (WRS) over the two sensitive-attribute readings:
// inter-industry pairs and same-industry company pairs.

struct WrsAnalysisRow {
    std::string system_id;
    PerturbationId perturbation = PerturbationId::P0;
    std::string z_kind;  // "Industry" or "Company"
    WrsResult result;
};

inline std::vector<std::pair<std::string, std::string>> industry_pairs(
    const std::set<std::string>& industries) {
    std::vector<std::string> sorted(industries.begin(), industries.end());
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        for (std::size_t j = i + 1; j < sorted.size(); ++j)
            pairs.emplace_back(sorted[i], sorted[j]);
    return pairs;
}

inline std::vector<std::pair<std::string, std::string>> same_industry_company_pairs(
    const std::map<std::string, std::string>& industry_of_entity) {
    std::map<std::string, std::vector<std::string>> by_industry;
    for (const auto& [entity, industry] : industry_of_entity)
        by_industry[industry].push_back(entity);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (auto& [_, entities] : by_industry) {
        std::sort(entities.begin(), entities.end());
        for (std::size_t i = 0; i < entities.size(); ++i)
            for (std::size_t j = i + 1; j < entities.size(); ++j)
                pairs.emplace_back(entities[i], entities[j]);
    }
    return pairs;
}

inline void write_wrs_csv(const std::vector<WrsAnalysisRow>& rows,
                          const std::filesystem::path& summary_path,
                          const std::filesystem::path& pairs_path) {
    std::ofstream summary(summary_path);
    if (!summary) fail_io("cannot write " + summary_path.string());
    summary << "system,perturbation,z,wrs\n";
    std::ofstream pairs(pairs_path);
    if (!pairs) fail_io("cannot write " + pairs_path.string());
    pairs << "system,perturbation,z,class_a,class_b,t,dof,p_two_sided,contribution,"
             "skipped\n";
    for (const auto& row : rows) {
        summary << row.system_id << "," << to_string(row.perturbation) << ","
                << row.z_kind << "," << format_double(row.result.score) << "\n";
        for (const auto& pair : row.result.pairs) {
            pairs << row.system_id << "," << to_string(row.perturbation) << ","
                  << row.z_kind << "," << pair.class_a << "," << pair.class_b << ",";
            if (pair.skipped)
                pairs << "NA,NA,NA,NA,1\n";
            else
                pairs << format_double(pair.t) << "," << format_double(pair.dof) << ","
                      << format_double(pair.p_two_sided) << ","
                      << format_double(pair.contribution) << ",0\n";
        }
    }
}

// ---------------------------------------------------------------------------
// Causal drivers.

// Default distribution set for one confounder: one favored value per class
// (DC1..DCk for companies, DI1..DIm for industries), optionally followed by a
// uniform baseline D0.
inline std::vector<DistributionSpec> default_distribution_specs(
    Confounder confounder, const std::vector<std::string>& class_values,
    std::size_t sample_size, double treated_weight, std::uint64_t seed_base,
    bool include_baseline) {
    std::vector<DistributionSpec> specs;
    const std::string prefix = confounder == Confounder::Company ? "DC" : "DI";
    for (std::size_t i = 0; i < class_values.size(); ++i) {
        DistributionSpec spec;
        spec.tag = prefix + std::to_string(i + 1);
        spec.confounder = confounder;
        spec.favored_value = class_values[i];
        spec.treated_weight = treated_weight;
        spec.control_weight = 1.0;
        spec.sample_size = sample_size;
        spec.seed = seed_base;
        specs.push_back(std::move(spec));
    }
    if (include_baseline) {
        DistributionSpec spec;
        spec.tag = "D0";
        spec.confounder = confounder;
        spec.favored_value.clear();
        spec.treated_weight = 1.0;
        spec.control_weight = 1.0;
        spec.sample_size = sample_size;
        spec.seed = seed_base;
        specs.push_back(std::move(spec));
    }
    return specs;
}

inline void write_causal_csv(const std::vector<CausalResult>& results,
                             const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << "system,perturbation,confounder,distribution,ape_o,ape_m,pie_percent,"
           "matched_pairs,dropped_treated\n";
    for (const auto& r : results) {
        out << r.system_id << "," << to_string(r.perturbation) << ","
            << to_string(r.confounder) << "," << r.distribution_tag << ","
            << format_double(r.ape_o) << "," << format_double(r.ape_m) << ","
            << format_double(r.pie) << "," << r.matched_pairs << ","
            << r.dropped_treated << "\n";
    }
}

// ---------------------------------------------------------------------------
// Score tables and rating reports.

struct ScoreEntry {
    std::string family;
    std::string perturbation;
    std::string system_id;
    double score = 0.0;
};

inline void write_scores_csv(const std::vector<ScoreEntry>& scores,
                             const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << "metric,perturbation,system,score\n";
    for (const auto& s : scores)
        out << s.family << "," << s.perturbation << "," << s.system_id << ","
            << format_double(s.score) << "\n";
}

inline std::vector<ScoreEntry> read_scores_csv(const std::filesystem::path& path) {
    const auto rows = read_csv(path.string());
    if (rows.empty() ||
        rows[0] != std::vector<std::string>{"metric", "perturbation", "system", "score"})
        fail_validation("score file " + path.string() +
                        " must start with header 'metric,perturbation,system,score'");
    std::vector<ScoreEntry> scores;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 4)
            fail_validation("malformed score row " + std::to_string(r + 1) + " in " +
                            path.string());
        scores.push_back({row[0], row[1], row[2],
                          parse_double(row[3], path.string() + " row " +
                                                   std::to_string(r + 1))});
    }
    return scores;
}

struct Omission {
    std::string system_id;
    std::string perturbation;
    std::string family;
    std::string reason;
};

inline void write_omissions_csv(const std::vector<Omission>& omissions,
                                const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail_io("cannot write " + path.string());
    out << "system,perturbation,metric,reason\n";
    for (const auto& o : omissions)
        out << o.system_id << "," << o.perturbation << "," << o.family << ","
            << o.reason << "\n";
}

// Builds every rating row from a flat score table: one row per metric family
// and perturbation with at least one scored system.
inline std::vector<RatingRow> rating_rows_from_scores(
    const std::vector<ScoreEntry>& scores, std::size_t levels) {
    std::map<std::pair<std::string, std::string>, ScoreMap> cells;
    for (const auto& s : scores) cells[{s.family, s.perturbation}][s.system_id] = s.score;
    std::vector<RatingRow> rows;
    for (const auto& [key, cell] : cells)
        rows.push_back(make_rating_row(key.first, key.second, cell, levels));
    std::sort(rows.begin(), rows.end(), [](const RatingRow& a, const RatingRow& b) {
        if (a.metric_id != b.metric_id) return a.metric_id < b.metric_id;
        return a.perturbation < b.perturbation;
    });
    return rows;
}

inline std::string format_rating_row_text(const RatingRow& row) {
    std::ostringstream partial, complete;
    partial << "{";
    complete << "{";
    for (std::size_t i = 0; i < row.partial_order.size(); ++i) {
        const auto& item = row.partial_order[i];
        if (i) {
            partial << ", ";
            complete << ", ";
        }
        char score[40];
        std::snprintf(score, sizeof(score), "%.6g", item.score);
        partial << item.system_id << ": " << score;
        complete << item.system_id << ": " << row.ratings.at(item.system_id);
    }
    partial << "}";
    complete << "}";
    return row.perturbation + " | " + partial.str() + " | " + complete.str();
}

// Writes reports/ratings.csv plus one plain-text table per metric family with
// the partial order next to the bucketed complete order.
inline void write_rating_reports(const std::vector<RatingRow>& rows,
                                 const std::filesystem::path& reports_dir) {
    std::filesystem::create_directories(reports_dir);
    std::ofstream csv(reports_dir / "ratings.csv");
    if (!csv) fail_io("cannot write ratings.csv");
    csv << "metric,perturbation,system,raw_score,rating\n";
    std::map<std::string, std::vector<const RatingRow*>> by_family;
    for (const auto& row : rows) {
        by_family[row.metric_id].push_back(&row);
        for (const auto& item : row.partial_order)
            csv << row.metric_id << "," << row.perturbation << "," << item.system_id
                << "," << format_double(item.score) << ","
                << row.ratings.at(item.system_id) << "\n";
    }
    for (const auto& [family, family_rows] : by_family) {
        std::ostringstream text;
        text << "metric: " << family << "\n";
        text << "P | Partial Order | Complete Order\n";
        for (const RatingRow* row : family_rows)
            text << format_rating_row_text(*row) << "\n";
        write_text_file(reports_dir / ("rating_" + family + ".txt"), text.str());
    }
}

}  // namespace tsrate
