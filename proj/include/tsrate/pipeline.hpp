#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tsrate/analysis.hpp"
#include "tsrate/config.hpp"
#include "tsrate/data_model.hpp"
#include "tsrate/exchange.hpp"
#include "tsrate/forecasters.hpp"
#include "tsrate/perturb.hpp"
#include "tsrate/png_io.hpp"
#include "tsrate/specgram.hpp"
#include "tsrate/workspace.hpp"

namespace tsrate {

namespace detail {

inline std::string truth_key(const std::string& entity, std::size_t t_index) {
    return entity + "#" + std::to_string(t_index);
}

inline void write_run_lock(const RunConfig& cfg, const Workspace& ws) {
    std::filesystem::create_directories(ws.root);
    write_text_file(ws.lock_file(), config_echo(cfg).dump(2) + "\n");
}

// Image-variant windows share the control window's numeric content but carry
// their own perturbation tag and id.
inline WindowSample retag_window(const WindowSample& p0, PerturbationId p) {
    WindowSample w = p0;
    w.perturbation = p;
    w.window_id = make_window_id(w.entity_id, w.t_index, p);
    return w;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// prepare: source data -> window tables, images, exchange manifest.

struct PrepareSummary {
    std::size_t entities = 0;
    std::size_t control_windows = 0;
    std::size_t numeric_variants = 1;
    std::size_t images = 0;
    std::vector<std::string> warnings;
};

inline PrepareSummary run_prepare(const RunConfig& cfg, unsigned threads = 1) {
    if (cfg.price_csv.empty() || cfg.meta_csv.empty())
        fail_validation("prepare: config must name data.price_csv and data.meta_csv");
    for (const std::string& path : {cfg.price_csv, cfg.meta_csv})
        if (!std::filesystem::exists(path))
            fail_validation("prepare: configured path does not exist: " + path);
    if (cfg.sentiment_provider == "file" && cfg.has_perturbation(PerturbationId::P5) &&
        !std::filesystem::exists(cfg.sentiment_file))
        fail_validation("prepare: sentiment file does not exist: " + cfg.sentiment_file);
    const Workspace ws(cfg.workspace);
    const EntityTable table = load_price_table(cfg.price_csv, cfg.meta_csv);

    PrepareSummary summary;
    summary.entities = table.entities.size();

    WindowingResult control = make_windows(table, cfg.n, cfg.d, cfg.stride);
    summary.warnings = control.warnings;
    summary.control_windows = control.windows.size();
    if (control.windows.empty())
        fail_validation("prepare: no entity produced a full window (need n+d = " +
                        std::to_string(cfg.n + cfg.d) + " observations)");
    sort_canonical(control.windows);

    reset_dir(ws.windows_dir());
    reset_dir(ws.images_dir());
    reset_dir(ws.exchange_dir());

    write_windows_csv(control.windows, cfg.n, cfg.d, ws.windows_csv(PerturbationId::P0));

    // Semantic perturbations corrupt the source series, then re-window, so the
    // corruption reaches both the model inputs and the perturbed truth slices.
    std::vector<WindowSample> all_variants = control.windows;
    for (PerturbationId p : {PerturbationId::P1, PerturbationId::P2}) {
        if (!cfg.has_perturbation(p)) continue;
        std::vector<WindowSample> variant;
        for (const auto& entity : table.entities) {
            const std::vector<double> series =
                p == PerturbationId::P1 ? apply_drop_to_zero(entity.prices, cfg.n)
                                        : apply_value_halved(entity.prices, cfg.n);
            auto windows = make_windows_for_series(entity, series, cfg.n, cfg.d,
                                                   cfg.stride, p);
            variant.insert(variant.end(), windows.begin(), windows.end());
        }
        sort_canonical(variant);
        write_windows_csv(variant, cfg.n, cfg.d, ws.windows_csv(p));
        ++summary.numeric_variants;
        all_variants.insert(all_variants.end(), variant.begin(), variant.end());
    }

    std::vector<EntityStats> stats;
    for (const auto& e : table.entities) {
        EntityStats s;
        s.entity_id = e.entity_id;
        s.industry = e.industry;
        const auto [mn, mx] = std::minmax_element(e.prices.begin(), e.prices.end());
        s.min_price = *mn;
        s.max_price = *mx;
        s.length = e.prices.size();
        stats.push_back(std::move(s));
    }
    write_entity_stats(stats, ws.windows_dir() / "entity_stats.csv");

    // Sentiment labels for the composite perturbation, keyed by control ids.
    std::map<std::string, SentimentLabel> sentiment;
    if (cfg.has_perturbation(PerturbationId::P5)) {
        if (cfg.sentiment_provider == "file") {
            std::set<std::string> required;
            for (const auto& w : control.windows) required.insert(w.window_id);
            sentiment = read_sentiment_file(cfg.sentiment_file, required);
        } else {
            for (const auto& w : control.windows)
                sentiment[w.window_id] = heuristic_sentiment(w.input, cfg.sentiment_tau);
        }
    }

    // One rendered image per control window and image perturbation. The
    // wavelet bank is shared read-only across workers.
    const MorletBank bank(default_scale_grid(), cfg.n, cfg.omega0);
    const bool want_p3 = cfg.has_perturbation(PerturbationId::P3);
    const bool want_p4 = cfg.has_perturbation(PerturbationId::P4);
    const bool want_p5 = cfg.has_perturbation(PerturbationId::P5);
    std::vector<std::size_t> image_counts(control.windows.size(), 0);
    parallel_for(control.windows.size(), threads, [&](std::size_t i) {
        const WindowSample& w = control.windows[i];
        const auto stripe = stripe_from_series(standardize(w.input).scaled);
        const SpectroImage base = render_image(w, stripe, bank);
        std::size_t count = 0;
        auto emit = [&](const SpectroImage& img, PerturbationId p) {
            SpectroImage named = img;
            named.window_id = make_window_id(w.entity_id, w.t_index, p);
            named.perturbation = p;
            WindowSample tagged = detail::retag_window(w, p);
            png::write_rgb8(named, (ws.images_dir() / ws.image_name(tagged)).string());
            ++count;
        };
        emit(base, PerturbationId::P0);
        if (want_p3) emit(apply_single_pixel(base), PerturbationId::P3);
        if (want_p4) emit(apply_saturation(base, 10.0), PerturbationId::P4);
        if (want_p5)
            emit(apply_sentiment_stripe(base, sentiment.at(w.window_id)),
                 PerturbationId::P5);
        image_counts[i] = count;
    });
    for (std::size_t c : image_counts) summary.images += c;

    // Image-only variants join the exchange manifest with the control
    // window's numbers under their own ids.
    for (PerturbationId p :
         {PerturbationId::P3, PerturbationId::P4, PerturbationId::P5}) {
        if (!cfg.has_perturbation(p)) continue;
        for (const auto& w : control.windows)
            all_variants.push_back(detail::retag_window(w, p));
    }
    export_windows_for_external(all_variants, ws.exchange_dir(),
                                [&](const WindowSample& w) -> std::string {
                                    if (w.perturbation == PerturbationId::P1 ||
                                        w.perturbation == PerturbationId::P2)
                                        return "";
                                    return "images/" + ws.image_name(w);
                                });

    std::string warning_text;
    for (const auto& w : summary.warnings) warning_text += w + "\n";
    write_text_file(ws.windows_dir() / "warnings.txt", warning_text);
    detail::write_run_lock(cfg, ws);
    return summary;
}

// ---------------------------------------------------------------------------
// forecast: window tables -> per-system prediction files.

struct ForecastSummary {
    std::size_t systems = 0;
    std::size_t records = 0;
    std::vector<std::string> warnings;
};

namespace detail {

// All window variants a forecaster may see, in canonical order: numeric
// variants from their tables, image variants re-tagged from the controls.
inline std::vector<WindowSample> load_all_variants(const RunConfig& cfg,
                                                   const Workspace& ws) {
    if (!std::filesystem::exists(ws.windows_csv(PerturbationId::P0)))
        fail_validation("workspace is not prepared: missing " +
                        ws.windows_csv(PerturbationId::P0).string());
    std::vector<WindowSample> all =
        read_windows_csv(ws.windows_csv(PerturbationId::P0), cfg.n, cfg.d);
    const std::vector<WindowSample> control = all;
    for (PerturbationId p : {PerturbationId::P1, PerturbationId::P2}) {
        if (!cfg.has_perturbation(p)) continue;
        const auto variant = read_windows_csv(ws.windows_csv(p), cfg.n, cfg.d);
        all.insert(all.end(), variant.begin(), variant.end());
    }
    for (PerturbationId p :
         {PerturbationId::P3, PerturbationId::P4, PerturbationId::P5}) {
        if (!cfg.has_perturbation(p)) continue;
        for (const auto& w : control) all.push_back(retag_window(w, p));
    }
    sort_canonical(all);
    return all;
}

inline std::map<std::string, std::vector<double>> control_truths(
    const std::vector<WindowSample>& variants) {
    std::map<std::string, std::vector<double>> truths;
    for (const auto& w : variants)
        if (w.perturbation == PerturbationId::P0)
            truths[truth_key(w.entity_id, w.t_index)] = w.truth;
    return truths;
}

}  // namespace detail

inline ForecastSummary run_forecast(const RunConfig& cfg, unsigned threads = 1) {
    const Workspace ws(cfg.workspace);
    const std::vector<WindowSample> variants = detail::load_all_variants(cfg, ws);
    const auto truths = detail::control_truths(variants);
    const auto stats = read_entity_stats(ws.windows_dir() / "entity_stats.csv");

    reset_dir(ws.forecasts_dir());
    ForecastSummary summary;

    auto emit_system = [&](const std::string& system_id,
                           const std::vector<ForecastRecord>& records) {
        write_forecast_records(records,
                               ws.forecasts_dir() / (system_id + ".jsonl"));
        ++summary.systems;
        summary.records += records.size();
    };

    if (cfg.run_arima) {
        std::vector<std::optional<ForecastRecord>> slots(variants.size());
        std::vector<std::string> slot_warnings(variants.size());
        parallel_for(variants.size(), threads, [&](std::size_t i) {
            const WindowSample& w = variants[i];
            if (is_image_only(w.perturbation)) return;  // numeric-only system
            try {
                const OrderSelection order =
                    select_arima_order(w.input, cfg.arima_p_max, cfg.arima_q_max);
                ForecastRecord rec;
                rec.window_id = w.window_id;
                rec.system_id = kArimaSystemId;
                rec.perturbation = w.perturbation;
                const ArimaModel model = fit_arima(w.input, order.p, order.q);
                rec.predictions =
                    forecast_arima(model, w.input.back(), static_cast<int>(cfg.d));
                slots[i] = std::move(rec);
                if (order.fallback)
                    slot_warnings[i] = "arima: order selection fell back to (1,1) for " +
                                       w.window_id;
            } catch (const Error& e) {
                slot_warnings[i] =
                    "arima: window " + w.window_id + " skipped: " + e.what();
            }
        });
        std::vector<ForecastRecord> records;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (slots[i]) records.push_back(std::move(*slots[i]));
            if (!slot_warnings[i].empty()) summary.warnings.push_back(slot_warnings[i]);
        }
        emit_system(kArimaSystemId, records);
    }

    if (cfg.run_biased) {
        std::vector<ForecastRecord> records;
        records.reserve(variants.size());
        for (const auto& w : variants) {
            const auto it = truths.find(detail::truth_key(w.entity_id, w.t_index));
            if (it == truths.end())
                fail_internal("missing control truth for " + w.window_id);
            records.push_back(biased_predict(w, it->second, cfg.biased));
        }
        emit_system(kBiasedSystemId, records);
    }

    if (cfg.run_random) {
        std::vector<ForecastRecord> records;
        records.reserve(variants.size());
        for (const auto& w : variants) {
            const auto it = stats.find(w.entity_id);
            if (it == stats.end())
                fail_internal("missing entity stats for " + w.entity_id);
            records.push_back(random_predict(w, it->second.min_price,
                                             it->second.max_price, cfg.random_cfg,
                                             cfg.d));
        }
        emit_system(kRandomSystemId, records);
    }

    // External systems are imported independently; a bad file disables only
    // that system.
    const WindowIndex index = make_window_index(variants, cfg.d);
    for (const auto& ext : cfg.externals) {
        try {
            auto records =
                import_external_predictions(ext.predictions_path, ext.system_id, index);
            std::sort(records.begin(), records.end(),
                      [](const ForecastRecord& a, const ForecastRecord& b) {
                          if (a.perturbation != b.perturbation)
                              return a.perturbation < b.perturbation;
                          return a.window_id < b.window_id;
                      });
            emit_system(ext.system_id, records);
        } catch (const Error& e) {
            summary.warnings.push_back("external system " + ext.system_id +
                                       " skipped: " + e.what());
        }
    }

    if (summary.systems == 0)
        fail_validation("forecast: no system produced records (all disabled or failed)");
    detail::write_run_lock(cfg, ws);
    return summary;
}

// ---------------------------------------------------------------------------
// rate: prediction files -> residuals, hypothesis tests, causal analysis,
// score tables and rating reports.

struct RateSummary {
    std::size_t systems = 0;
    std::size_t perturbations = 0;
    std::size_t windows = 0;
    std::size_t rating_rows = 0;
    std::vector<std::string> warnings;
};

inline RateSummary run_rate(const RunConfig& cfg, unsigned threads = 1) {
    const Workspace ws(cfg.workspace);
    const std::vector<WindowSample> variants = detail::load_all_variants(cfg, ws);
    const auto truths = detail::control_truths(variants);
    std::map<std::string, const WindowSample*> variant_of;
    for (const auto& w : variants) variant_of[w.window_id] = &w;

    if (!std::filesystem::exists(ws.forecasts_dir()))
        fail_validation("rate: forecast store missing; run the forecast stage first");
    std::vector<std::filesystem::path> forecast_files;
    for (const auto& entry : std::filesystem::directory_iterator(ws.forecasts_dir()))
        if (entry.path().extension() == ".jsonl") forecast_files.push_back(entry.path());
    std::sort(forecast_files.begin(), forecast_files.end());
    if (forecast_files.empty())
        fail_validation("rate: no forecast files in " + ws.forecasts_dir().string());

    RateSummary summary;
    const WindowIndex index = make_window_index(variants, cfg.d);

    // Residual outcomes, always measured against the control truth.
    std::vector<ResidualRecord> residuals;
    std::vector<std::string> systems;
    for (const auto& file : forecast_files) {
        const std::string system_id = file.stem().string();
        systems.push_back(system_id);
        const auto records =
            import_external_predictions(file.string(), system_id, index);
        for (const auto& rec : records) {
            const WindowSample& w = *variant_of.at(rec.window_id);
            const auto truth_it = truths.find(detail::truth_key(w.entity_id, w.t_index));
            if (truth_it == truths.end())
                fail_internal("missing control truth for " + w.window_id);
            residuals.push_back(
                build_residual_record(w, rec, truth_it->second, cfg.signed_rmax));
        }
    }
    std::sort(residuals.begin(), residuals.end(),
              [](const ResidualRecord& a, const ResidualRecord& b) {
                  return std::tie(a.system_id, a.perturbation, a.entity_id,
                                  a.window_id) < std::tie(b.system_id, b.perturbation,
                                                          b.entity_id, b.window_id);
              });

    reset_dir(ws.analysis_dir());
    reset_dir(ws.reports_dir());
    write_residuals_csv(residuals, ws.analysis_dir() / "residuals.csv");
    summary.systems = systems.size();
    {
        std::set<PerturbationId> ps;
        for (const auto& r : residuals) ps.insert(r.perturbation);
        summary.perturbations = ps.size();
        summary.windows = truths.size();  // control window positions
    }

    // Grouped record views.
    std::map<std::string, std::map<PerturbationId, std::vector<const ResidualRecord*>>>
        grouped;
    for (const auto& r : residuals) grouped[r.system_id][r.perturbation].push_back(&r);

    std::vector<PerturbationId> run_perturbations{PerturbationId::P0};
    for (PerturbationId p : cfg.perturbations) run_perturbations.push_back(p);

    // Accuracy table, with NA rows for combinations a system never produced.
    std::vector<AccuracyRow> accuracy_rows;
    std::vector<Omission> omissions;
    for (const auto& system_id : systems) {
        for (PerturbationId p : run_perturbations) {
            const auto& by_p = grouped[system_id];
            const auto it = by_p.find(p);
            std::vector<const ResidualRecord*> records;
            if (it != by_p.end()) records = it->second;
            accuracy_rows.push_back(aggregate_accuracy(system_id, p, records));
            if (records.empty())
                omissions.push_back({system_id, to_string(p), "all",
                                     "no records (not applicable or skipped)"});
        }
    }
    write_accuracy_csv(accuracy_rows, ws.analysis_dir() / "accuracy.csv");

    // Sensitive-attribute groupings for the statistical analysis.
    std::map<std::string, std::string> industry_of_entity;
    std::set<std::string> industries;
    for (const auto& w : variants) {
        industry_of_entity[w.entity_id] = w.industry;
        industries.insert(w.industry);
    }
    const auto ind_pairs = industry_pairs(industries);
    const auto comp_pairs = same_industry_company_pairs(industry_of_entity);

    std::vector<WrsAnalysisRow> wrs_rows;
    for (const auto& system_id : systems) {
        for (PerturbationId p : run_perturbations) {
            const auto it = grouped[system_id].find(p);
            if (it == grouped[system_id].end()) continue;
            std::map<std::string, std::vector<double>> by_industry, by_entity;
            for (const ResidualRecord* r : it->second) {
                by_industry[r->industry].push_back(r->r_max);
                by_entity[r->entity_id].push_back(r->r_max);
            }
            WrsAnalysisRow industry_row{system_id, p, "Industry",
                                        wrs(by_industry, ind_pairs, cfg.cis, cfg.weights)};
            WrsAnalysisRow company_row{system_id, p, "Company",
                                       wrs(by_entity, comp_pairs, cfg.cis, cfg.weights)};
            for (const auto& warn : industry_row.result.warnings)
                summary.warnings.push_back(system_id + " " + std::string(to_string(p)) +
                                           " " + warn);
            for (const auto& warn : company_row.result.warnings)
                summary.warnings.push_back(system_id + " " + std::string(to_string(p)) +
                                           " " + warn);
            wrs_rows.push_back(std::move(industry_row));
            wrs_rows.push_back(std::move(company_row));
        }
    }
    write_wrs_csv(wrs_rows, ws.analysis_dir() / "wrs.csv",
                  ws.analysis_dir() / "wrs_pairs.csv");

    // Causal analysis per (system, perturbation, confounder). Each task gets
    // its own derived seed so execution order cannot matter.
    struct CausalTask {
        std::string system_id;
        PerturbationId p = PerturbationId::P1;
    };
    std::vector<CausalTask> tasks;
    for (const auto& system_id : systems)
        for (PerturbationId p : cfg.perturbations)
            if (grouped[system_id].count(p) && grouped[system_id].count(PerturbationId::P0))
                tasks.push_back({system_id, p});

    std::vector<std::string> entity_values(industry_of_entity.size());
    {
        std::size_t i = 0;
        for (const auto& [entity, _] : industry_of_entity) entity_values[i++] = entity;
    }
    const std::vector<std::string> industry_values(industries.begin(), industries.end());

    struct CausalTaskResult {
        std::vector<CausalResult> results;
        std::map<Confounder, CausalAnalysis> analyses;
        std::vector<std::string> warnings;
    };
    std::vector<CausalTaskResult> task_results(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t ti) {
        const CausalTask& task = tasks[ti];
        CausalTaskResult& out = task_results[ti];
        for (Confounder confounder : {Confounder::Company, Confounder::Industry}) {
            std::vector<CausalUnit> pool;
            for (PerturbationId p : {task.p, PerturbationId::P0}) {
                for (const ResidualRecord* r : grouped[task.system_id][p]) {
                    CausalUnit u;
                    u.window_id = r->window_id;
                    u.z_class = confounder == Confounder::Company ? r->entity_id
                                                                  : r->industry;
                    u.treated = p != PerturbationId::P0;
                    u.outcome = r->r_max;
                    pool.push_back(std::move(u));
                }
            }
            std::sort(pool.begin(), pool.end(),
                      [](const CausalUnit& a, const CausalUnit& b) {
                          return a.window_id < b.window_id;
                      });
            const std::size_t sample_size = std::max<std::size_t>(
                2, static_cast<std::size_t>(
                       static_cast<double>(pool.size()) * cfg.sample_fraction));
            const std::uint64_t seed_base = splitmix64(
                cfg.seed ^ fnv1a64(task.system_id + "|" + to_string(task.p) + "|" +
                                   to_string(confounder)));
            const auto specs = default_distribution_specs(
                confounder,
                confounder == Confounder::Company ? entity_values : industry_values,
                std::min(sample_size, pool.size()), cfg.treated_weight, seed_base,
                cfg.include_baseline_distribution);
            CausalAnalysis analysis = analyze(pool, task.system_id, task.p, specs);
            out.results.insert(out.results.end(), analysis.per_spec.begin(),
                               analysis.per_spec.end());
            out.warnings.insert(out.warnings.end(), analysis.warnings.begin(),
                                analysis.warnings.end());
            out.analyses[confounder] = std::move(analysis);
        }
    });

    std::vector<CausalResult> causal_results;
    std::map<std::pair<std::string, PerturbationId>, std::map<Confounder, CausalAnalysis>>
        causal_by_key;
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        auto& out = task_results[ti];
        causal_results.insert(causal_results.end(), out.results.begin(),
                              out.results.end());
        summary.warnings.insert(summary.warnings.end(), out.warnings.begin(),
                                out.warnings.end());
        causal_by_key[{tasks[ti].system_id, tasks[ti].p}] = std::move(out.analyses);
    }
    write_causal_csv(causal_results, ws.analysis_dir() / "causal.csv");

    // Flat score table feeding the rating step.
    std::vector<ScoreEntry> scores;
    for (const auto& row : wrs_rows) {
        const std::string family = row.z_kind == "Industry" ? "WRS_I" : "WRS_C";
        scores.push_back({family, to_string(row.perturbation), row.system_id,
                          row.result.score});
    }
    for (const auto& [key, analyses] : causal_by_key) {
        for (const auto& [confounder, analysis] : analyses) {
            const std::string suffix = confounder == Confounder::Company ? "_C" : "_I";
            if (!analysis.valid) {
                omissions.push_back({key.first, to_string(key.second), "PIE" + suffix,
                                     "all distributions failed"});
                omissions.push_back({key.first, to_string(key.second), "APE" + suffix,
                                     "all distributions failed"});
                continue;
            }
            scores.push_back({"PIE" + suffix, to_string(key.second), key.first,
                              analysis.max_pie});
            scores.push_back({"APE" + suffix, to_string(key.second), key.first,
                              analysis.max_ape_m});
        }
    }
    for (const auto& row : accuracy_rows) {
        if (!row.available) continue;
        scores.push_back(
            {"SMAPE", to_string(row.perturbation), row.system_id, row.smape_mean});
        if (row.count > row.mase_excluded)
            scores.push_back(
                {"MASE", to_string(row.perturbation), row.system_id, row.mase_mean});
        else
            omissions.push_back({row.system_id, to_string(row.perturbation), "MASE",
                                 "every window had a constant input"});
        scores.push_back({"SignAcc", to_string(row.perturbation), row.system_id,
                          row.sign_accuracy_pct});
    }
    std::sort(scores.begin(), scores.end(), [](const ScoreEntry& a, const ScoreEntry& b) {
        return std::tie(a.family, a.perturbation, a.system_id) <
               std::tie(b.family, b.perturbation, b.system_id);
    });
    write_scores_csv(scores, ws.analysis_dir() / "scores.csv");
    write_omissions_csv(omissions, ws.analysis_dir() / "omissions.csv");

    const auto rating_rows = rating_rows_from_scores(scores, cfg.rating_level);
    summary.rating_rows = rating_rows.size();
    write_rating_reports(rating_rows, ws.reports_dir());

    std::ostringstream line;
    line << "systems=" << summary.systems << " perturbations=" << summary.perturbations
         << " windows=" << summary.windows;
    write_text_file(ws.reports_dir() / "summary.txt", line.str() + "\n");

    detail::write_run_lock(cfg, ws);
    return summary;
}

// Re-renders the rating reports from the persisted score table without
// recomputing anything.
inline std::size_t run_report(const RunConfig& cfg) {
    const Workspace ws(cfg.workspace);
    const auto scores_path = ws.analysis_dir() / "scores.csv";
    if (!std::filesystem::exists(scores_path))
        fail_validation("report: missing " + scores_path.string() +
                        "; run the rate stage first");
    const auto scores = read_scores_csv(scores_path);
    const auto rows = rating_rows_from_scores(scores, cfg.rating_level);
    write_rating_reports(rows, ws.reports_dir());
    return rows.size();
}

// Rating in isolation: reads a raw score table and emits rating reports,
// touching no other pipeline state.
inline std::size_t rate_from_scores(const std::string& scores_csv,
                                    const std::filesystem::path& out_dir,
                                    std::size_t levels) {
    const auto scores = read_scores_csv(scores_csv);
    const auto rows = rating_rows_from_scores(scores, levels);
    write_rating_reports(rows, out_dir);
    return rows.size();
}

}  // namespace tsrate
