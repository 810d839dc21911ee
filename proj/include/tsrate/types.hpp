#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "tsrate/error.hpp"

namespace tsrate {

// P0 is the unperturbed control. P1/P2 act on the numeric source series,
// P3/P4 on rendered images, P5 swaps the intensity stripe for a sentiment
// stripe.
enum class PerturbationId { P0, P1, P2, P3, P4, P5 };

constexpr int kPerturbationCount = 6;

inline const char* to_string(PerturbationId p) {
    switch (p) {
        case PerturbationId::P0: return "P0";
        case PerturbationId::P1: return "P1";
        case PerturbationId::P2: return "P2";
        case PerturbationId::P3: return "P3";
        case PerturbationId::P4: return "P4";
        case PerturbationId::P5: return "P5";
    }
    return "P?";
}

inline PerturbationId parse_perturbation(const std::string& s) {
    if (s.size() == 2 && s[0] == 'P' && s[1] >= '0' && s[1] <= '5')
        return static_cast<PerturbationId>(s[1] - '0');
    fail_validation("unknown perturbation id: '" + s + "'");
}

// True for perturbations that exist only in image space; numeric-only
// forecasters skip these and their metric rows are reported as NA.
inline bool is_image_only(PerturbationId p) {
    return p == PerturbationId::P3 || p == PerturbationId::P4 ||
           p == PerturbationId::P5;
}

struct EntitySeries {
    std::string entity_id;
    std::string industry;
    std::vector<std::string> dates;   // ISO-8601, strictly increasing
    std::vector<double> prices;       // adjusted closes, finite and > 0
};

struct EntityTable {
    std::vector<EntitySeries> entities;  // sorted by entity_id

    const EntitySeries* find(const std::string& entity_id) const {
        for (const auto& e : entities)
            if (e.entity_id == entity_id) return &e;
        return nullptr;
    }
};

// One (input, truth) pair cut from a source series. window_id is a pure
// function of (entity_id, t_index, perturbation) so records from different
// runs and workers can be joined deterministically.
struct WindowSample {
    std::string window_id;
    std::string entity_id;
    std::string industry;
    std::size_t t_index = 0;            // position of last input element
    std::vector<double> input;          // n values seen by the model
    std::vector<double> truth;          // d values following the input
    PerturbationId perturbation = PerturbationId::P0;
    std::string distribution_tag;       // set when sampled into a distribution
};

inline std::string make_window_id(const std::string& entity_id,
                                  std::size_t t_index, PerturbationId p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_%06zu_", t_index);
    return entity_id + buf + to_string(p);
}

struct ForecastRecord {
    std::string window_id;
    std::string system_id;
    PerturbationId perturbation = PerturbationId::P0;
    std::vector<double> predictions;  // d values
};

// Per-window outcome row. `mase` is absent when the naive in-sample error of
// the input window is zero (constant input); such rows are excluded from
// accuracy aggregates.
struct ResidualRecord {
    std::string window_id;
    std::string system_id;
    PerturbationId perturbation = PerturbationId::P0;
    std::string entity_id;
    std::string industry;
    std::vector<double> residuals;  // prediction - truth per horizon step
    double r_max = 0.0;
    double smape = 0.0;
    std::optional<double> mase;
    bool sign_hit = false;
};

}  // namespace tsrate
