#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "tsrate/error.hpp"

namespace tsrate {

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Unbiased (n-1) sample variance.
inline double sample_variance(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / static_cast<double>(xs.size() - 1);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double ibeta_reg(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// CDF of Student's t with `dof` degrees of freedom.
inline double t_cdf(double t, double dof) {
    if (dof <= 0.0) fail_validation("t_cdf: dof must be > 0");
    if (t == 0.0) return 0.5;
    const double x = dof / (dof + t * t);
    const double half_tail = 0.5 * ibeta_reg(0.5 * dof, 0.5, x);
    return t > 0.0 ? 1.0 - half_tail : half_tail;
}

// Two-sided critical value: the quantile at 1 - (1-ci)/2, found by bisection
// on the CDF to 1e-8.
inline double t_critical(double ci, double dof) {
    if (!(ci > 0.0 && ci < 1.0)) fail_validation("t_critical: ci must be in (0,1)");
    if (dof <= 0.0) fail_validation("t_critical: dof must be > 0");
    const double target = 1.0 - (1.0 - ci) / 2.0;
    double lo = 0.0;
    double hi = 1.0;
    while (t_cdf(hi, dof) < target && hi < 1e12) hi *= 2.0;
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (t_cdf(mid, dof) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct TTestResult {
    double t = 0.0;
    double dof = 0.0;
    double p_two_sided = 1.0;
};

// Welch's t statistic with an epsilon-stabilized denominator and
// Welch-Satterthwaite degrees of freedom. The epsilon keeps the statistic
// finite when both samples are constant.
inline TTestResult welch_t(const std::vector<double>& x1,
                           const std::vector<double>& x2, double eps = 1e-12) {
    if (x1.size() < 2 || x2.size() < 2)
        fail_validation("welch_t: both samples need at least 2 values");
    const double n1 = static_cast<double>(x1.size());
    const double n2 = static_cast<double>(x2.size());
    const double v1 = sample_variance(x1) / n1;
    const double v2 = sample_variance(x2) / n2;

    TTestResult r;
    r.t = (mean_of(x1) - mean_of(x2)) / std::sqrt(v1 + v2 + eps);
    if (v1 + v2 > 0.0) {
        r.dof = (v1 + v2) * (v1 + v2) /
                (v1 * v1 / (n1 - 1.0) + v2 * v2 / (n2 - 1.0));
    } else {
        r.dof = n1 + n2 - 2.0;  // both samples constant
    }
    r.p_two_sided = 2.0 * (1.0 - t_cdf(std::fabs(r.t), r.dof));
    if (r.p_two_sided < 0.0) r.p_two_sided = 0.0;
    if (r.p_two_sided > 1.0) r.p_two_sided = 1.0;
    return r;
}

}  // namespace tsrate
