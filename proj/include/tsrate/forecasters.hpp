#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tsrate/error.hpp"
#include "tsrate/rng.hpp"
#include "tsrate/types.hpp"

namespace tsrate {

inline constexpr const char* kArimaSystemId = "S_a";
inline constexpr const char* kBiasedSystemId = "S_b";
inline constexpr const char* kRandomSystemId = "S_r";

// ---------------------------------------------------------------------------
// ARIMA(p, 1, q) via two-stage Hannan-Rissanen least squares. Closed-form and
// deterministic; an approximation of full maximum likelihood that is adequate
// at the per-window training sizes used here.

struct ArimaModel {
    int p = 0;
    int d_order = 1;
    int q = 0;
    std::vector<double> phi;    // AR coefficients
    std::vector<double> theta;  // MA coefficients
    double intercept = 0.0;
    double residual_variance = 0.0;
    std::vector<double> diffs;      // differenced training series
    std::vector<double> residuals;  // stage-2 residuals, aligned with diffs
};

namespace detail {

// Least squares with a rank check; the design matrix must have full column
// rank or the fit is rejected.
inline Eigen::VectorXd solve_ls(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                int p, int q) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < A.cols())
        fail_validation("arima fit (" + std::to_string(p) + "," + std::to_string(q) +
                        "): singular regression matrix");
    return qr.solve(y);
}

}  // namespace detail

inline ArimaModel fit_arima(const std::vector<double>& train, int p, int q) {
    if (p < 0 || q < 0 || p > 5 || q > 5)
        fail_validation("arima: orders must be in 0..5");
    const std::size_t min_len =
        std::max<std::size_t>(30, 3 * static_cast<std::size_t>(p + q) + 10);
    if (train.size() < min_len)
        fail_validation("arima: need at least " + std::to_string(min_len) +
                        " observations, got " + std::to_string(train.size()));

    ArimaModel model;
    model.p = p;
    model.q = q;
    model.diffs.resize(train.size() - 1);
    for (std::size_t i = 0; i + 1 < train.size(); ++i)
        model.diffs[i] = train[i + 1] - train[i];
    const int n = static_cast<int>(model.diffs.size());

    // Stage 1: long autoregression to estimate innovations (only consumed
    // when q > 0).
    std::vector<double> innovations(model.diffs.size(), 0.0);
    int long_order = 0;
    if (q > 0) {
        long_order = std::min(20, n / 4);
        const int rows = n - long_order;
        Eigen::MatrixXd A(rows, long_order + 1);
        Eigen::VectorXd y(rows);
        for (int t = long_order; t < n; ++t) {
            const int r = t - long_order;
            A(r, 0) = 1.0;
            for (int i = 1; i <= long_order; ++i) A(r, i) = model.diffs[t - i];
            y(r) = model.diffs[t];
        }
        const Eigen::VectorXd beta = detail::solve_ls(A, y, p, q);
        for (int t = long_order; t < n; ++t) {
            double fitted = beta(0);
            for (int i = 1; i <= long_order; ++i) fitted += beta(i) * model.diffs[t - i];
            innovations[t] = model.diffs[t] - fitted;
        }
    }

    // Stage 2: regress the differenced series on p lags and q lagged
    // innovation estimates.
    const int t0 = std::max(p, long_order + q);
    const int rows = n - t0;
    if (rows <= p + q + 1)
        fail_validation("arima: insufficient data after differencing for (" +
                        std::to_string(p) + "," + std::to_string(q) + ")");
    Eigen::MatrixXd A(rows, 1 + p + q);
    Eigen::VectorXd y(rows);
    for (int t = t0; t < n; ++t) {
        const int r = t - t0;
        A(r, 0) = 1.0;
        for (int i = 1; i <= p; ++i) A(r, i) = model.diffs[t - i];
        for (int j = 1; j <= q; ++j) A(r, p + j) = innovations[t - j];
        y(r) = model.diffs[t];
    }
    const Eigen::VectorXd beta = detail::solve_ls(A, y, p, q);
    model.intercept = beta(0);
    for (int i = 0; i < p; ++i) model.phi.push_back(beta(1 + i));
    for (int j = 0; j < q; ++j) model.theta.push_back(beta(1 + p + j));

    model.residuals.assign(model.diffs.size(), 0.0);
    double ssr = 0.0;
    for (int t = t0; t < n; ++t) {
        double fitted = model.intercept;
        for (int i = 1; i <= p; ++i) fitted += model.phi[i - 1] * model.diffs[t - i];
        for (int j = 1; j <= q; ++j) fitted += model.theta[j - 1] * innovations[t - j];
        model.residuals[t] = model.diffs[t] - fitted;
        ssr += model.residuals[t] * model.residuals[t];
    }
    model.residual_variance = ssr / static_cast<double>(rows);
    return model;
}

struct OrderSelection {
    int p = 0;
    int q = 0;
    bool fallback = false;  // every candidate fit failed; (1,1) was assumed
};

// AIC grid search: len * ln(residual variance) + 2(p+q+1), computed over the
// differenced series length so candidates are compared on a common scale.
// Ties prefer smaller p+q, then smaller p.
inline OrderSelection select_arima_order(const std::vector<double>& train,
                                         int p_max = 3, int q_max = 3) {
    OrderSelection best;
    double best_aic = std::numeric_limits<double>::infinity();
    bool any = false;
    const double len = static_cast<double>(train.size() >= 1 ? train.size() - 1 : 0);
    for (int p = 0; p <= p_max; ++p) {
        for (int q = 0; q <= q_max; ++q) {
            double aic;
            try {
                const ArimaModel m = fit_arima(train, p, q);
                const double var = std::max(m.residual_variance, 1e-300);
                aic = len * std::log(var) + 2.0 * static_cast<double>(p + q + 1);
            } catch (const Error&) {
                continue;
            }
            const bool better =
                aic < best_aic - 1e-12 ||
                (std::fabs(aic - best_aic) <= 1e-12 &&
                 (p + q < best.p + best.q ||
                  (p + q == best.p + best.q && p < best.p)));
            if (!any || better) {
                best.p = p;
                best.q = q;
                best_aic = aic;
                any = true;
            }
        }
    }
    if (!any) {
        best.p = 1;
        best.q = 1;
        best.fallback = true;
    }
    return best;
}

// Recursive h-step forecast of the differenced series (future innovations are
// zero), integrated back to levels starting from last_level.
inline std::vector<double> forecast_arima(const ArimaModel& model,
                                          double last_level, int horizon) {
    if (horizon < 1) fail_validation("arima forecast: horizon must be >= 1");
    const int n = static_cast<int>(model.diffs.size());
    std::vector<double> diff_forecast(horizon, 0.0);
    for (int h = 0; h < horizon; ++h) {
        double value = model.intercept;
        for (int i = 1; i <= model.p; ++i) {
            const int k = h - i;
            value += model.phi[i - 1] * (k >= 0 ? diff_forecast[k] : model.diffs[n + k]);
        }
        for (int j = 1; j <= model.q; ++j) {
            const int k = h - j;
            if (k < 0) value += model.theta[j - 1] * model.residuals[n + k];
        }
        diff_forecast[h] = value;
    }
    std::vector<double> levels(horizon);
    double level = last_level;
    for (int h = 0; h < horizon; ++h) {
        level += diff_forecast[h];
        levels[h] = level;
    }
    return levels;
}

// ---------------------------------------------------------------------------
// Extreme baselines.

struct BiasedConfig {
    std::string favored_zero;   // entity predicted perfectly
    std::string favored_const;  // entity with a fixed offset
    double const_offset = 200.0;
    double other_offset = 800.0;
};

// Residual-by-construction system: predictions are the (unperturbed) truth
// plus a per-entity offset, so downstream r_max equals the offset exactly.
inline ForecastRecord biased_predict(const WindowSample& window,
                                     const std::vector<double>& truth,
                                     const BiasedConfig& cfg) {
    if (cfg.const_offset < 0.0 || cfg.other_offset < 0.0)
        fail_validation("biased system: offsets must be >= 0");
    double offset = cfg.other_offset;
    if (window.entity_id == cfg.favored_zero) offset = 0.0;
    else if (window.entity_id == cfg.favored_const) offset = cfg.const_offset;
    ForecastRecord rec;
    rec.window_id = window.window_id;
    rec.system_id = kBiasedSystemId;
    rec.perturbation = window.perturbation;
    rec.predictions.reserve(truth.size());
    for (double v : truth) rec.predictions.push_back(v + offset);
    return rec;
}

struct RandomConfig {
    double margin = 100.0;
    std::uint64_t seed = 0;
};

// Uniform draws on [entity_min - margin, entity_max + margin] from a stream
// keyed by (seed, window_id); results are independent of scheduling.
inline ForecastRecord random_predict(const WindowSample& window, double entity_min,
                                     double entity_max, const RandomConfig& cfg,
                                     std::size_t horizon) {
    if (cfg.margin < 0.0) fail_validation("random system: margin must be >= 0");
    if (entity_min > entity_max)
        fail_validation("random system: entity_min > entity_max");
    RngStream stream(cfg.seed, window.window_id);
    ForecastRecord rec;
    rec.window_id = window.window_id;
    rec.system_id = kRandomSystemId;
    rec.perturbation = window.perturbation;
    rec.predictions.reserve(horizon);
    for (std::size_t i = 0; i < horizon; ++i)
        rec.predictions.push_back(
            stream.uniform(entity_min - cfg.margin, entity_max + cfg.margin));
    return rec;
}

}  // namespace tsrate
