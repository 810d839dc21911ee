#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tsrate/error.hpp"
#include "tsrate/rng.hpp"
#include "tsrate/types.hpp"

namespace tsrate {

enum class Confounder { Company, Industry };

inline const char* to_string(Confounder c) {
    return c == Confounder::Company ? "Company" : "Industry";
}

// One outcome row projected for causal analysis: treated means the row comes
// from the perturbed arm (Pi), control from P0.
struct CausalUnit {
    std::string window_id;
    std::string z_class;
    bool treated = false;
    double outcome = 0.0;
    double propensity = 0.0;
};

// A confounded sampling distribution: rows whose Z matches favored_value and
// that are treated get treated_weight, everything else control_weight. An
// empty favored_value gives uniform sampling (the baseline distribution).
struct DistributionSpec {
    std::string tag;
    Confounder confounder = Confounder::Company;
    std::string favored_value;
    double treated_weight = 2.0;
    double control_weight = 1.0;
    std::size_t sample_size = 0;
    std::uint64_t seed = 0;
};

// Weighted sampling without replacement (Efraimidis-Spirakis reservoir keys:
// log(u)/w, keep the largest). Pool order and the seeded stream fully
// determine the sample.
inline std::vector<CausalUnit> build_distribution(const std::vector<CausalUnit>& pool,
                                                  const DistributionSpec& spec) {
    if (spec.treated_weight <= 0.0 || spec.control_weight <= 0.0)
        fail_validation("distribution " + spec.tag + ": weights must be > 0");
    if (spec.sample_size > pool.size())
        fail_validation("distribution " + spec.tag + ": sample_size " +
                        std::to_string(spec.sample_size) + " exceeds pool size " +
                        std::to_string(pool.size()));

    std::set<std::string> classes;
    std::set<std::string> classes_with_control;
    for (const auto& u : pool) {
        classes.insert(u.z_class);
        if (!u.treated) classes_with_control.insert(u.z_class);
    }
    for (const auto& z : classes)
        if (!classes_with_control.count(z))
            fail_validation("distribution " + spec.tag + ": class '" + z +
                            "' has no control records");
    if (!spec.favored_value.empty() && !classes.count(spec.favored_value))
        fail_validation("distribution " + spec.tag + ": favored value '" +
                        spec.favored_value + "' not present in the data");

    RngStream stream(spec.seed, spec.tag);
    std::vector<std::pair<double, std::size_t>> keyed(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const bool favored_treated =
            pool[i].treated && !spec.favored_value.empty() &&
            pool[i].z_class == spec.favored_value;
        const double w = favored_treated ? spec.treated_weight : spec.control_weight;
        double u = stream.uniform01();
        while (u <= 0.0) u = stream.uniform01();
        keyed[i] = {std::log(u) / w, i};
    }
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(spec.sample_size),
                      keyed.end(), [](const auto& a, const auto& b) {
                          if (a.first != b.first) return a.first > b.first;
                          return a.second < b.second;
                      });
    std::vector<std::size_t> chosen(spec.sample_size);
    for (std::size_t i = 0; i < spec.sample_size; ++i) chosen[i] = keyed[i].second;
    std::sort(chosen.begin(), chosen.end());
    std::vector<CausalUnit> out;
    out.reserve(spec.sample_size);
    for (std::size_t idx : chosen) out.push_back(pool[idx]);
    return out;
}

// ---------------------------------------------------------------------------
// Propensity model: logistic regression on the one-hot confounder class.

struct PropensityModel {
    std::vector<std::string> classes;  // sorted; one weight each
    Eigen::VectorXd weights;           // intercept first

    double predict(const std::string& z) const {
        double eta = weights(0);
        auto it = std::lower_bound(classes.begin(), classes.end(), z);
        if (it != classes.end() && *it == z)
            eta += weights(1 + (it - classes.begin()));
        const double p = 1.0 / (1.0 + std::exp(-eta));
        return std::clamp(p, 1e-12, 1.0 - 1e-12);
    }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Bernoulli log-likelihood and its gradient for the finite-difference checks.
inline std::pair<double, Eigen::VectorXd> logistic_loglik_grad(
    const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = X * beta;
    double ll = 0.0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(beta.size());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double p = std::clamp(sigmoid(eta(i)), 1e-15, 1.0 - 1e-15);
        ll += y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p);
        grad += (y(i) - p) * X.row(i).transpose();
    }
    return {ll, grad};
}

// IRLS (Newton) with a small L2 ridge on non-intercept weights; the ridge
// keeps separable one-hot designs solvable. Converges when the largest
// coefficient change drops below 1e-8, capped at 100 iterations.
inline Eigen::VectorXd fit_logistic_design(const Eigen::MatrixXd& X,
                                           const Eigen::VectorXd& y,
                                           double ridge = 1e-6) {
    const double total = y.sum();
    if (total <= 0.0 || total >= static_cast<double>(y.size()))
        fail_validation("logistic fit: labels contain a single class");
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
    Eigen::VectorXd penalty_diag = Eigen::VectorXd::Constant(X.cols(), ridge);
    penalty_diag(0) = 0.0;  // intercept unpenalized
    for (int iter = 0; iter < 100; ++iter) {
        const Eigen::VectorXd eta = X * beta;
        Eigen::VectorXd p(eta.size()), w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            p(i) = std::clamp(sigmoid(eta(i)), 1e-12, 1.0 - 1e-12);
            w(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
        }
        Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
        H += penalty_diag.asDiagonal();
        const Eigen::VectorXd grad =
            X.transpose() * (y - p) - penalty_diag.asDiagonal() * beta;
        const Eigen::VectorXd step = H.ldlt().solve(grad);
        beta += step;
        if (step.cwiseAbs().maxCoeff() < 1e-8) break;
    }
    return beta;
}

inline PropensityModel fit_logistic(const std::vector<CausalUnit>& units) {
    if (units.empty()) fail_validation("logistic fit: empty sample");
    PropensityModel model;
    {
        std::set<std::string> classes;
        for (const auto& u : units) classes.insert(u.z_class);
        model.classes.assign(classes.begin(), classes.end());
    }
    const Eigen::Index n = static_cast<Eigen::Index>(units.size());
    const Eigen::Index k = static_cast<Eigen::Index>(model.classes.size());
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 1 + k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        const auto it = std::lower_bound(model.classes.begin(), model.classes.end(),
                                         units[static_cast<std::size_t>(i)].z_class);
        X(i, 1 + (it - model.classes.begin())) = 1.0;
        y(i) = units[static_cast<std::size_t>(i)].treated ? 1.0 : 0.0;
    }
    model.weights = fit_logistic_design(X, y);
    return model;
}

// ---------------------------------------------------------------------------
// Matching and effect estimates.

struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (treated, control) indices
    std::size_t dropped_treated = 0;
};

// Greedy 1:1 nearest-neighbor on |propensity difference| without replacement.
// Treated units are processed in ascending window_id order; ties between
// controls break on the smaller window_id.
inline MatchResult match_pairs(const std::vector<CausalUnit>& treated,
                               const std::vector<CausalUnit>& control) {
    if (control.empty()) fail_validation("matching: empty control set");
    std::vector<std::size_t> treated_order(treated.size());
    for (std::size_t i = 0; i < treated.size(); ++i) treated_order[i] = i;
    std::sort(treated_order.begin(), treated_order.end(),
              [&](std::size_t a, std::size_t b) {
                  return treated[a].window_id < treated[b].window_id;
              });
    std::vector<std::size_t> control_order(control.size());
    for (std::size_t i = 0; i < control.size(); ++i) control_order[i] = i;
    std::sort(control_order.begin(), control_order.end(),
              [&](std::size_t a, std::size_t b) {
                  return control[a].window_id < control[b].window_id;
              });

    std::vector<bool> used(control.size(), false);
    MatchResult result;
    std::size_t remaining = control.size();
    for (std::size_t t : treated_order) {
        if (remaining == 0) {
            ++result.dropped_treated;
            continue;
        }
        double best_dist = std::numeric_limits<double>::infinity();
        std::size_t best_pos = control.size();
        for (std::size_t pos = 0; pos < control_order.size(); ++pos) {
            const std::size_t c = control_order[pos];
            if (used[c]) continue;
            const double dist =
                std::fabs(treated[t].propensity - control[c].propensity);
            if (dist < best_dist) {  // first in window_id order wins ties
                best_dist = dist;
                best_pos = c;
            }
        }
        used[best_pos] = true;
        --remaining;
        result.pairs.emplace_back(t, best_pos);
    }
    return result;
}

inline double ape(const std::vector<double>& outcomes_treated,
                  const std::vector<double>& outcomes_control) {
    if (outcomes_treated.empty() || outcomes_control.empty())
        fail_validation("ape: both outcome sets must be non-empty");
    double mt = 0.0, mc = 0.0;
    for (double v : outcomes_treated) mt += v;
    for (double v : outcomes_control) mc += v;
    mt /= static_cast<double>(outcomes_treated.size());
    mc /= static_cast<double>(outcomes_control.size());
    return std::fabs(mt - mc);
}

inline double pie_percent(double ape_o, double ape_m) {
    return std::fabs(std::fabs(ape_o) - std::fabs(ape_m)) * 100.0;
}

struct CausalResult {
    std::string system_id;
    PerturbationId perturbation = PerturbationId::P1;
    Confounder confounder = Confounder::Company;
    std::string distribution_tag;
    double ape_o = 0.0;
    double ape_m = 0.0;
    double pie = 0.0;
    std::size_t matched_pairs = 0;
    std::size_t dropped_treated = 0;
};

struct CausalAnalysis {
    std::vector<CausalResult> per_spec;
    double max_pie = 0.0;    // worst-case confounding across distributions
    double max_ape_m = 0.0;  // worst-case deconfounded effect
    std::vector<std::string> warnings;
    bool valid = false;      // at least one distribution succeeded
};

// Runs one distribution end to end: sample, observational effect, propensity
// fit, matching, matched effect.
inline CausalResult analyze_distribution(const std::vector<CausalUnit>& pool,
                                         const DistributionSpec& spec) {
    const std::vector<CausalUnit> sampled = build_distribution(pool, spec);
    std::vector<CausalUnit> treated, control;
    for (const auto& u : sampled)
        (u.treated ? treated : control).push_back(u);
    if (treated.empty() || control.empty())
        fail_validation("distribution " + spec.tag + ": sample lost an arm");

    std::vector<double> treated_out, control_out;
    for (const auto& u : treated) treated_out.push_back(u.outcome);
    for (const auto& u : control) control_out.push_back(u.outcome);
    CausalResult result;
    result.distribution_tag = spec.tag;
    result.confounder = spec.confounder;
    result.ape_o = ape(treated_out, control_out);

    const PropensityModel model = fit_logistic(sampled);
    for (auto& u : treated) u.propensity = model.predict(u.z_class);
    for (auto& u : control) u.propensity = model.predict(u.z_class);

    const MatchResult match = match_pairs(treated, control);
    std::vector<double> mt, mc;
    for (const auto& [t, c] : match.pairs) {
        mt.push_back(treated[t].outcome);
        mc.push_back(control[c].outcome);
    }
    result.ape_m = ape(mt, mc);
    result.pie = pie_percent(result.ape_o, result.ape_m);
    result.matched_pairs = match.pairs.size();
    result.dropped_treated = match.dropped_treated;
    return result;
}

// Full analysis for one (system, perturbation): every distribution spec is
// run independently; failures are excluded with a warning and the aggregates
// take the MAX over the remaining ones.
inline CausalAnalysis analyze(const std::vector<CausalUnit>& pool,
                              const std::string& system_id, PerturbationId pi,
                              const std::vector<DistributionSpec>& specs) {
    CausalAnalysis analysis;
    for (const auto& spec : specs) {
        try {
            CausalResult r = analyze_distribution(pool, spec);
            r.system_id = system_id;
            r.perturbation = pi;
            analysis.max_pie = std::max(analysis.max_pie, r.pie);
            analysis.max_ape_m = std::max(analysis.max_ape_m, r.ape_m);
            analysis.valid = true;
            analysis.per_spec.push_back(std::move(r));
        } catch (const Error& e) {
            analysis.warnings.push_back("system " + system_id + " " + to_string(pi) +
                                        ": " + e.what());
        }
    }
    return analysis;
}

}  // namespace tsrate
