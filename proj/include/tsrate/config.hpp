#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "tsrate/error.hpp"
#include "tsrate/forecasters.hpp"
#include "tsrate/types.hpp"

namespace tsrate {

struct ExternalSystemConfig {
    std::string system_id;
    std::string predictions_path;
};

// Resolved run configuration. The JSON schema is checked strictly: unknown
// keys are rejected so typos fail loudly before any stage starts.
struct RunConfig {
    std::string price_csv;
    std::string meta_csv;
    std::string workspace = "workspace";

    std::size_t n = 80;
    std::size_t d = 20;
    std::size_t stride = 1;
    std::vector<PerturbationId> perturbations{PerturbationId::P1, PerturbationId::P2,
                                              PerturbationId::P3, PerturbationId::P4,
                                              PerturbationId::P5};

    bool run_arima = true;
    bool run_biased = true;
    bool run_random = true;
    int arima_p_max = 3;
    int arima_q_max = 3;
    BiasedConfig biased;
    RandomConfig random_cfg{100.0, 424243};
    std::vector<ExternalSystemConfig> externals;

    std::string sentiment_provider = "heuristic";  // heuristic | file
    std::string sentiment_file;
    double sentiment_tau = 0.05;

    std::vector<double> cis{0.95, 0.70, 0.60};
    std::vector<double> weights{1.0, 0.8, 0.6};
    std::size_t rating_level = 3;
    std::uint64_t seed = 1;
    double sample_fraction = 0.8;
    double treated_weight = 2.0;
    bool include_baseline_distribution = false;
    bool signed_rmax = false;
    double omega0 = 5.0;

    bool has_perturbation(PerturbationId p) const {
        if (p == PerturbationId::P0) return true;
        for (PerturbationId q : perturbations)
            if (q == p) return true;
        return false;
    }
};

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         const std::set<std::string>& known) {
    for (const auto& [key, _] : obj.items())
        if (!known.count(key))
            fail_validation("config: unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const nlohmann::json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail_validation("config: bad value for '" + key + "'");
    }
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using detail::get_or;
    if (!j.is_object()) fail_validation("config: top level must be an object");
    detail::require_keys(j, "top level",
                         {"data", "workspace", "window", "perturbations", "systems",
                          "sentiment", "analysis"});

    RunConfig cfg;
    if (j.contains("data")) {
        const auto& data = j.at("data");
        detail::require_keys(data, "data", {"price_csv", "meta_csv"});
        cfg.price_csv = get_or<std::string>(data, "price_csv", "");
        cfg.meta_csv = get_or<std::string>(data, "meta_csv", "");
    }
    cfg.workspace = get_or<std::string>(j, "workspace", cfg.workspace);

    if (j.contains("window")) {
        const auto& w = j.at("window");
        detail::require_keys(w, "window", {"n", "d", "stride"});
        cfg.n = get_or<std::size_t>(w, "n", cfg.n);
        cfg.d = get_or<std::size_t>(w, "d", cfg.d);
        cfg.stride = get_or<std::size_t>(w, "stride", cfg.stride);
        if (cfg.n < 2 || cfg.d < 1 || cfg.stride < 1)
            fail_validation("config: window sizes must satisfy n >= 2, d >= 1, stride >= 1");
    }

    if (j.contains("perturbations")) {
        if (!j.at("perturbations").is_array())
            fail_validation("config: perturbations must be an array");
        cfg.perturbations.clear();
        std::set<std::string> seen;
        for (const auto& p : j.at("perturbations")) {
            const std::string name = p.get<std::string>();
            if (!seen.insert(name).second)
                fail_validation("config: duplicate perturbation '" + name + "'");
            const PerturbationId id = parse_perturbation(name);
            if (id == PerturbationId::P0)
                fail_validation("config: P0 is implicit and cannot be listed");
            cfg.perturbations.push_back(id);
        }
    }

    if (j.contains("systems")) {
        const auto& systems = j.at("systems");
        detail::require_keys(systems, "systems", {"arima", "biased", "random", "external"});
        if (systems.contains("arima")) {
            const auto& a = systems.at("arima");
            detail::require_keys(a, "systems.arima", {"enabled", "p_max", "q_max"});
            cfg.run_arima = get_or<bool>(a, "enabled", true);
            cfg.arima_p_max = get_or<int>(a, "p_max", cfg.arima_p_max);
            cfg.arima_q_max = get_or<int>(a, "q_max", cfg.arima_q_max);
            if (cfg.arima_p_max < 0 || cfg.arima_q_max < 0 || cfg.arima_p_max > 5 ||
                cfg.arima_q_max > 5)
                fail_validation("config: arima order bounds must be in 0..5");
        }
        if (systems.contains("biased")) {
            const auto& b = systems.at("biased");
            detail::require_keys(b, "systems.biased",
                                 {"enabled", "favored_zero", "favored_const",
                                  "const_offset", "other_offset"});
            cfg.run_biased = get_or<bool>(b, "enabled", true);
            cfg.biased.favored_zero = get_or<std::string>(b, "favored_zero", "");
            cfg.biased.favored_const = get_or<std::string>(b, "favored_const", "");
            cfg.biased.const_offset = get_or<double>(b, "const_offset", 200.0);
            cfg.biased.other_offset = get_or<double>(b, "other_offset", 800.0);
            if (cfg.biased.const_offset < 0.0 || cfg.biased.other_offset < 0.0)
                fail_validation("config: biased offsets must be >= 0");
        }
        if (systems.contains("random")) {
            const auto& r = systems.at("random");
            detail::require_keys(r, "systems.random", {"enabled", "margin", "seed"});
            cfg.run_random = get_or<bool>(r, "enabled", true);
            cfg.random_cfg.margin = get_or<double>(r, "margin", 100.0);
            cfg.random_cfg.seed = get_or<std::uint64_t>(r, "seed", cfg.random_cfg.seed);
            if (cfg.random_cfg.margin < 0.0)
                fail_validation("config: random margin must be >= 0");
        }
        if (systems.contains("external")) {
            if (!systems.at("external").is_array())
                fail_validation("config: systems.external must be an array");
            for (const auto& e : systems.at("external")) {
                detail::require_keys(e, "systems.external[]", {"system_id", "predictions"});
                ExternalSystemConfig ext;
                ext.system_id = get_or<std::string>(e, "system_id", "");
                ext.predictions_path = get_or<std::string>(e, "predictions", "");
                if (ext.system_id.empty() || ext.predictions_path.empty())
                    fail_validation("config: external systems need system_id and predictions");
                if (ext.system_id == kArimaSystemId || ext.system_id == kBiasedSystemId ||
                    ext.system_id == kRandomSystemId)
                    fail_validation("config: external system_id collides with a built-in id");
                cfg.externals.push_back(std::move(ext));
            }
        }
    }

    if (j.contains("sentiment")) {
        const auto& s = j.at("sentiment");
        detail::require_keys(s, "sentiment", {"provider", "path", "threshold"});
        cfg.sentiment_provider = get_or<std::string>(s, "provider", "heuristic");
        cfg.sentiment_file = get_or<std::string>(s, "path", "");
        cfg.sentiment_tau = get_or<double>(s, "threshold", 0.05);
        if (cfg.sentiment_provider != "heuristic" && cfg.sentiment_provider != "file")
            fail_validation("config: sentiment provider must be 'heuristic' or 'file'");
        if (cfg.sentiment_provider == "file" && cfg.sentiment_file.empty())
            fail_validation("config: sentiment provider 'file' needs a path");
        if (cfg.sentiment_tau <= 0.0)
            fail_validation("config: sentiment threshold must be > 0");
    }

    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        detail::require_keys(a, "analysis",
                             {"cis", "weights", "rating_level", "seed", "sample_fraction",
                              "treated_weight", "include_baseline_distribution",
                              "signed_rmax", "omega0"});
        cfg.cis = get_or<std::vector<double>>(a, "cis", cfg.cis);
        cfg.weights = get_or<std::vector<double>>(a, "weights", cfg.weights);
        cfg.rating_level = get_or<std::size_t>(a, "rating_level", cfg.rating_level);
        cfg.seed = get_or<std::uint64_t>(a, "seed", cfg.seed);
        cfg.sample_fraction = get_or<double>(a, "sample_fraction", cfg.sample_fraction);
        cfg.treated_weight = get_or<double>(a, "treated_weight", cfg.treated_weight);
        cfg.include_baseline_distribution =
            get_or<bool>(a, "include_baseline_distribution", false);
        cfg.signed_rmax = get_or<bool>(a, "signed_rmax", false);
        cfg.omega0 = get_or<double>(a, "omega0", cfg.omega0);
        if (cfg.cis.size() != cfg.weights.size() || cfg.cis.empty())
            fail_validation("config: cis and weights must be non-empty and equal length");
        for (double ci : cfg.cis)
            if (!(ci > 0.0 && ci < 1.0))
                fail_validation("config: confidence levels must be in (0,1)");
        for (double w : cfg.weights)
            if (!(w > 0.0)) fail_validation("config: weights must be > 0");
        if (cfg.rating_level < 1) fail_validation("config: rating_level must be >= 1");
        if (!(cfg.sample_fraction > 0.0 && cfg.sample_fraction <= 1.0))
            fail_validation("config: sample_fraction must be in (0,1]");
        if (!(cfg.treated_weight > 0.0))
            fail_validation("config: treated_weight must be > 0");
        if (!(cfg.omega0 > 0.0)) fail_validation("config: omega0 must be > 0");
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_validation("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) fail_validation("config: " + path + " is not valid JSON");
    return parse_config(j);
}

// Canonical JSON echo of the resolved configuration, written as run.lock so
// every run records the settings that produced it.
inline nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json j;
    j["data"]["price_csv"] = cfg.price_csv;
    j["data"]["meta_csv"] = cfg.meta_csv;
    j["workspace"] = cfg.workspace;
    j["window"] = {{"n", cfg.n}, {"d", cfg.d}, {"stride", cfg.stride}};
    j["perturbations"] = nlohmann::json::array();
    for (PerturbationId p : cfg.perturbations) j["perturbations"].push_back(to_string(p));
    j["systems"]["arima"] = {{"enabled", cfg.run_arima},
                             {"p_max", cfg.arima_p_max},
                             {"q_max", cfg.arima_q_max}};
    j["systems"]["biased"] = {{"enabled", cfg.run_biased},
                              {"favored_zero", cfg.biased.favored_zero},
                              {"favored_const", cfg.biased.favored_const},
                              {"const_offset", cfg.biased.const_offset},
                              {"other_offset", cfg.biased.other_offset}};
    j["systems"]["random"] = {{"enabled", cfg.run_random},
                              {"margin", cfg.random_cfg.margin},
                              {"seed", cfg.random_cfg.seed}};
    j["systems"]["external"] = nlohmann::json::array();
    for (const auto& e : cfg.externals)
        j["systems"]["external"].push_back(
            {{"system_id", e.system_id}, {"predictions", e.predictions_path}});
    j["sentiment"] = {{"provider", cfg.sentiment_provider},
                      {"path", cfg.sentiment_file},
                      {"threshold", cfg.sentiment_tau}};
    j["analysis"] = {{"cis", cfg.cis},
                     {"weights", cfg.weights},
                     {"rating_level", cfg.rating_level},
                     {"seed", cfg.seed},
                     {"sample_fraction", cfg.sample_fraction},
                     {"treated_weight", cfg.treated_weight},
                     {"include_baseline_distribution", cfg.include_baseline_distribution},
                     {"signed_rmax", cfg.signed_rmax},
                     {"omega0", cfg.omega0}};
    return j;
}

}  // namespace tsrate
