#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsrate/error.hpp"
#include "tsrate/stats.hpp"

namespace tsrate {

struct ResidualOutcome {
    std::vector<double> residuals;
    double r_max = 0.0;
};

// Residuals are prediction - truth per horizon step; r_max is the worst
// absolute step. A signed variant (largest positive excess) is available
// behind a flag for diagnostics.
inline ResidualOutcome residual_outcome(const std::vector<double>& pred,
                                        const std::vector<double>& truth,
                                        bool signed_max = false) {
    if (pred.size() != truth.size())
        fail_validation("residual_outcome: prediction/truth length mismatch");
    ResidualOutcome out;
    out.residuals.resize(pred.size());
    double worst = signed_max ? -std::numeric_limits<double>::infinity() : 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double r = pred[i] - truth[i];
        out.residuals[i] = r;
        const double candidate = signed_max ? r : std::fabs(r);
        if (candidate > worst) worst = candidate;
    }
    out.r_max = pred.empty() ? 0.0 : worst;
    return out;
}

// Symmetric mean absolute percentage error in [0, 2]. Terms where both the
// actual and predicted values are zero contribute 0.
inline double smape(const std::vector<double>& truth,
                    const std::vector<double>& pred) {
    if (truth.size() != pred.size() || truth.empty())
        fail_validation("smape: inputs must be non-empty and equal length");
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double denom = (std::fabs(truth[i]) + std::fabs(pred[i])) / 2.0;
        if (denom > 0.0) acc += std::fabs(truth[i] - pred[i]) / denom;
    }
    return acc / static_cast<double>(truth.size());
}

// Mean absolute error scaled by the naive one-step in-sample error of the
// input window. The denominator sums the t-1 consecutive differences and
// divides by t. Returns nullopt for constant inputs (zero denominator);
// callers flag and exclude such rows.
inline std::optional<double> mase(const std::vector<double>& input,
                                  const std::vector<double>& truth,
                                  const std::vector<double>& pred) {
    if (input.size() < 2) fail_validation("mase: input window needs >= 2 values");
    if (truth.size() != pred.size() || truth.empty())
        fail_validation("mase: truth/prediction length mismatch");
    double naive = 0.0;
    for (std::size_t i = 1; i < input.size(); ++i)
        naive += std::fabs(input[i] - input[i - 1]);
    naive /= static_cast<double>(input.size());
    if (naive == 0.0) return std::nullopt;
    double err = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        err += std::fabs(truth[i] - pred[i]);
    err /= static_cast<double>(truth.size());
    return err / naive;
}

// Direction class relative to the last observed input value: +1 up, -1 down,
// 0 flat (its own class).
inline int sign_class(double mean_value, double last_input) {
    const double diff = mean_value - last_input;
    if (diff > 0.0) return 1;
    if (diff < 0.0) return -1;
    return 0;
}

inline bool sign_hit(const std::vector<double>& pred,
                     const std::vector<double>& truth, double last_input) {
    return sign_class(mean_of(pred), last_input) ==
           sign_class(mean_of(truth), last_input);
}

// ---------------------------------------------------------------------------
// Weighted Rejection Score

struct WrsPairDetail {
    std::string class_a;
    std::string class_b;
    double t = 0.0;
    double dof = 0.0;
    double p_two_sided = 1.0;
    std::vector<bool> rejected;  // one flag per confidence level
    double contribution = 0.0;
    bool skipped = false;        // a side had < 2 samples
};

struct WrsResult {
    double score = 0.0;
    std::vector<WrsPairDetail> pairs;
    std::vector<std::string> warnings;
};

inline const std::vector<double>& default_wrs_cis() {
    static const std::vector<double> cis{0.95, 0.70, 0.60};
    return cis;
}

inline const std::vector<double>& default_wrs_weights() {
    static const std::vector<double> weights{1.0, 0.8, 0.6};
    return weights;
}

// For every class pair, runs Welch's t-test and adds w_i for each confidence
// level at which |t| reaches the two-sided critical value. With the default
// three levels each pair contributes at most 1 + 0.8 + 0.6 = 2.4.
inline WrsResult wrs(
    const std::map<std::string, std::vector<double>>& outcome_groups,
    const std::vector<std::pair<std::string, std::string>>& pairs,
    const std::vector<double>& cis = default_wrs_cis(),
    const std::vector<double>& weights = default_wrs_weights()) {
    if (cis.size() != weights.size())
        fail_validation("wrs: cis and weights must have the same length");
    WrsResult result;
    for (const auto& [a, b] : pairs) {
        WrsPairDetail detail;
        detail.class_a = a;
        detail.class_b = b;
        auto ita = outcome_groups.find(a);
        auto itb = outcome_groups.find(b);
        if (ita == outcome_groups.end() || itb == outcome_groups.end() ||
            ita->second.size() < 2 || itb->second.size() < 2) {
            detail.skipped = true;
            result.warnings.push_back("wrs: pair (" + a + ", " + b +
                                      ") skipped: fewer than 2 samples in a class");
            result.pairs.push_back(std::move(detail));
            continue;
        }
        const TTestResult tt = welch_t(ita->second, itb->second);
        detail.t = tt.t;
        detail.dof = tt.dof;
        detail.p_two_sided = tt.p_two_sided;
        for (std::size_t i = 0; i < cis.size(); ++i) {
            const bool reject = std::fabs(tt.t) >= t_critical(cis[i], tt.dof);
            detail.rejected.push_back(reject);
            if (reject) detail.contribution += weights[i];
        }
        result.score += detail.contribution;
        result.pairs.push_back(std::move(detail));
    }
    return result;
}

}  // namespace tsrate
