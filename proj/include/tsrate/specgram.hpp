#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "tsrate/data_model.hpp"
#include "tsrate/error.hpp"
#include "tsrate/image.hpp"
#include "tsrate/types.hpp"

namespace tsrate {

constexpr double kDefaultOmega0 = 5.0;

// Morlet wavelet at offset x for scale s:
//   sqrt(1/s) * pi^(-1/4) * exp(-x^2 / (2 s^2)) * exp(i omega0 x / s)
inline std::complex<double> morlet(double x, double s,
                                   double omega0 = kDefaultOmega0) {
    if (s <= 0.0) fail_validation("morlet: scale must be > 0");
    constexpr double kPiQuarterInv = 0.75112554446494248286;  // pi^(-1/4)
    const double envelope = std::sqrt(1.0 / s) * kPiQuarterInv *
                            std::exp(-(x * x) / (2.0 * s * s));
    const double phase = omega0 * x / s;
    return {envelope * std::cos(phase), envelope * std::sin(phase)};
}

// Geometric scale grid, one scale per spectrogram row. The default spans
// s = 1 .. n/2 across the 112 rows.
inline std::vector<double> default_scale_grid(std::size_t count = kSpecRows,
                                              double s_min = 1.0,
                                              double s_max = 40.0) {
    std::vector<double> scales(count);
    if (count == 1) {
        scales[0] = s_min;
        return scales;
    }
    const double ratio = std::log(s_max / s_min) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k)
        scales[k] = s_min * std::exp(ratio * static_cast<double>(k));
    return scales;
}

// Precomputed conjugate wavelet taps per scale, evaluated at integer offsets
// -(n-1) .. n-1. Shared across all windows of a run.
class MorletBank {
public:
    MorletBank(std::vector<double> scales, std::size_t series_len, double omega0)
        : scales_(std::move(scales)), half_(series_len - 1) {
        if (scales_.empty()) fail_validation("cwt: scale list must be non-empty");
        taps_.resize(scales_.size());
        for (std::size_t k = 0; k < scales_.size(); ++k) {
            taps_[k].resize(2 * half_ + 1);
            for (std::size_t j = 0; j < taps_[k].size(); ++j) {
                const double x = static_cast<double>(j) - static_cast<double>(half_);
                taps_[k][j] = std::conj(morlet(x, scales_[k], omega0));
            }
        }
    }

    const std::vector<double>& scales() const { return scales_; }

    std::complex<double> tap(std::size_t scale_idx, std::ptrdiff_t offset) const {
        return taps_[scale_idx][static_cast<std::size_t>(offset + static_cast<std::ptrdiff_t>(half_))];
    }

private:
    std::vector<double> scales_;
    std::size_t half_;
    std::vector<std::vector<std::complex<double>>> taps_;
};

// Magnitude matrix of the continuous wavelet transform, scales x time:
//   out[k][t] = | sum_u series[u] * conj(psi(u - t; s_k)) |
// with zero padding outside the series bounds.
inline std::vector<std::vector<double>> cwt_magnitudes(
    const std::vector<double>& series, const MorletBank& bank) {
    const std::size_t n = series.size();
    std::vector<std::vector<double>> out(bank.scales().size(),
                                         std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < bank.scales().size(); ++k) {
        for (std::size_t t = 0; t < n; ++t) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t u = 0; u < n; ++u) {
                acc += series[u] * bank.tap(k, static_cast<std::ptrdiff_t>(u) -
                                                   static_cast<std::ptrdiff_t>(t));
            }
            out[k][t] = std::abs(acc);
        }
    }
    return out;
}

inline std::vector<std::vector<double>> cwt_magnitudes(
    const std::vector<double>& series, const std::vector<double>& scales,
    double omega0 = kDefaultOmega0) {
    if (scales.empty()) fail_validation("cwt: scale list must be non-empty");
    if (series.empty()) return {scales.size(), std::vector<double>{}};
    MorletBank bank(scales, series.size(), omega0);
    return cwt_magnitudes(series, bank);
}

// Linear interpolation of `values` onto `target` equally spaced positions.
inline std::vector<double> resample_linear(const std::vector<double>& values,
                                           std::size_t target) {
    std::vector<double> out(target, 0.0);
    if (values.empty()) return out;
    if (values.size() == 1) {
        std::fill(out.begin(), out.end(), values[0]);
        return out;
    }
    const double step = static_cast<double>(values.size() - 1) /
                        static_cast<double>(target - 1);
    for (std::size_t j = 0; j < target; ++j) {
        const double pos = step * static_cast<double>(j);
        const std::size_t lo = std::min(static_cast<std::size_t>(pos), values.size() - 2);
        const double frac = pos - static_cast<double>(lo);
        out[j] = values[lo] * (1.0 - frac) + values[lo + 1] * frac;
    }
    return out;
}

// Grayscale stripe bytes for a window: the series is min-max mapped to
// 0..255 and resampled to the image width. Constant series map to mid-gray.
inline std::vector<std::uint8_t> stripe_from_series(const std::vector<double>& values) {
    if (values.empty()) fail_validation("stripe_from_series: empty input");
    const auto resampled = resample_linear(values, kImageSize);
    const auto [mn_it, mx_it] = std::minmax_element(resampled.begin(), resampled.end());
    const double mn = *mn_it, mx = *mx_it;
    std::vector<std::uint8_t> stripe(kImageSize, 128);
    if (mx > mn) {
        for (int j = 0; j < kImageSize; ++j)
            stripe[j] = to_byte(255.0 * (resampled[j] - mn) / (mx - mn));
    }
    return stripe;
}

// Renders the 128x128 image for one window: the standardized input is
// transformed with the wavelet bank over 112 scales, the time axis is
// resampled from n samples to 128 columns, magnitudes are min-max normalized
// per image, colormapped, and the stripe is replicated over the top 16 rows
// as grayscale. Row 16 carries the smallest scale.
inline SpectroImage render_image(const WindowSample& window,
                                 const std::vector<std::uint8_t>& stripe,
                                 const MorletBank& bank) {
    if (stripe.size() != kImageSize)
        fail_validation("render_image: stripe must have one byte per column");
    if (bank.scales().size() != kSpecRows)
        fail_validation("render_image: bank must have one scale per spectrogram row");

    SpectroImage image;
    image.window_id = window.window_id;
    image.perturbation = window.perturbation;

    for (int row = 0; row < kStripeRows; ++row)
        for (int col = 0; col < kImageSize; ++col)
            image.at(row, col) = Rgb{stripe[col], stripe[col], stripe[col]};

    const auto standardized = standardize(window.input);
    const auto magnitudes = cwt_magnitudes(standardized.scaled, bank);

    std::vector<std::vector<double>> rows(kSpecRows);
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kSpecRows; ++k) {
        rows[k] = resample_linear(magnitudes[k], kImageSize);
        for (double v : rows[k]) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
    }
    const double span = mx - mn;
    for (int k = 0; k < kSpecRows; ++k) {
        for (int col = 0; col < kImageSize; ++col) {
            const double v = span > 0.0 ? (rows[k][col] - mn) / span : 0.0;
            image.at(kStripeRows + k, col) = colormap(v);
        }
    }
    return image;
}

inline SpectroImage render_image(const WindowSample& window,
                                 const std::vector<std::uint8_t>& stripe,
                                 double omega0 = kDefaultOmega0) {
    MorletBank bank(default_scale_grid(), window.input.size(), omega0);
    return render_image(window, stripe, bank);
}

}  // namespace tsrate
