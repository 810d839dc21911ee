#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tsrate/error.hpp"
#include "tsrate/image.hpp"
#include "tsrate/types.hpp"

namespace tsrate {

// --- Semantic perturbations (applied to the source series before windowing,
// so the corruption propagates into every window cut from it) ---------------

// P1: every `period`-th value (1-based), i.e. 0-based indices period-1,
// 2*period-1, ..., is set to zero. With period == window width and stride 1
// every window then contains at least one zero.
inline std::vector<double> apply_drop_to_zero(std::vector<double> series,
                                              std::size_t period = 80) {
    if (period < 1) fail_validation("drop_to_zero: period must be >= 1");
    for (std::size_t i = period - 1; i < series.size(); i += period)
        series[i] = 0.0;
    return series;
}

// P2: targeted positions are halved instead of zeroed.
inline std::vector<double> apply_value_halved(std::vector<double> series,
                                              std::size_t period = 80) {
    if (period < 1) fail_validation("value_halved: period must be >= 1");
    for (std::size_t i = period - 1; i < series.size(); i += period)
        series[i] /= 2.0;
    return series;
}

// --- Input-specific perturbations (image space) -----------------------------

// P3: the center pixel (height/2, width/2) is set to black.
inline SpectroImage apply_single_pixel(SpectroImage image) {
    if (image.pixels.size() != kImageSize * kImageSize)
        fail_validation("single_pixel: image must be 128x128");
    image.at(kImageSize / 2, kImageSize / 2) = Rgb{0, 0, 0};
    image.perturbation = PerturbationId::P3;
    return image;
}

// P4: per-pixel HSV saturation scaled by `factor` (clamped at 1); hue and
// value are preserved up to round-trip rounding.
inline SpectroImage apply_saturation(SpectroImage image, double factor = 10.0) {
    if (!(factor > 0.0)) fail_validation("saturation: factor must be > 0");
    if (image.pixels.size() != kImageSize * kImageSize)
        fail_validation("saturation: image must be 128x128");
    for (auto& px : image.pixels) {
        Hsv hsv = rgb_to_hsv(px);
        hsv.s = std::min(1.0, hsv.s * factor);
        px = hsv_to_rgb(hsv);
    }
    image.perturbation = PerturbationId::P4;
    return image;
}

// --- Composite perturbation (P5) --------------------------------------------

enum class SentimentLabel : int { Negative = -1, Neutral = 0, Positive = 1 };

inline SentimentLabel sentiment_from_int(int v) {
    if (v < -1 || v > 1)
        fail_validation("sentiment label must be -1, 0 or 1, got " + std::to_string(v));
    return static_cast<SentimentLabel>(v);
}

// Built-in stand-in for an external sentiment system: ordinary least squares
// slope over (index, price), normalized by the window mean. The relative
// slope r = b*n / mean is compared against the threshold tau.
inline SentimentLabel heuristic_sentiment(const std::vector<double>& window_input,
                                          double tau = 0.05) {
    const std::size_t n = window_input.size();
    if (n < 2) fail_validation("heuristic_sentiment: need at least 2 values");
    double mean_x = (static_cast<double>(n) - 1.0) / 2.0;
    double mean_y = 0.0;
    for (double v : window_input) mean_y += v;
    mean_y /= static_cast<double>(n);
    if (mean_y == 0.0) return SentimentLabel::Neutral;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - mean_x;
        sxy += dx * (window_input[i] - mean_y);
        sxx += dx * dx;
    }
    const double slope = sxy / sxx;
    const double r = slope * static_cast<double>(n) / mean_y;
    if (r > tau) return SentimentLabel::Positive;
    if (r < -tau) return SentimentLabel::Negative;
    return SentimentLabel::Neutral;
}

// Stripe intensity for a sentiment label: -1 -> 0, 0 -> 128, +1 -> 255.
inline std::uint8_t sentiment_intensity(SentimentLabel label) {
    switch (label) {
        case SentimentLabel::Negative: return 0;
        case SentimentLabel::Positive: return 255;
        default: return 128;
    }
}

inline std::vector<std::uint8_t> sentiment_stripe(SentimentLabel label) {
    return std::vector<std::uint8_t>(kImageSize, sentiment_intensity(label));
}

// P5: replaces the intensity stripe with the sentiment stripe; the
// spectrogram region is untouched.
inline SpectroImage apply_sentiment_stripe(SpectroImage image, SentimentLabel label) {
    const std::uint8_t v = sentiment_intensity(label);
    for (int row = 0; row < kStripeRows; ++row)
        for (int col = 0; col < kImageSize; ++col)
            image.at(row, col) = Rgb{v, v, v};
    image.perturbation = PerturbationId::P5;
    return image;
}

}  // namespace tsrate
