#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tsrate/error.hpp"
#include "tsrate/types.hpp"

namespace tsrate {

constexpr int kImageSize = 128;     // width and height
constexpr int kStripeRows = 16;     // rows 0..15 hold the intensity stripe
constexpr int kSpecRows = kImageSize - kStripeRows;  // 112 spectrogram rows

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

// 128x128 RGB image: a 16-row intensity stripe above a 112-row spectrogram.
// Row 16 holds the smallest wavelet scale (highest frequency).
struct SpectroImage {
    std::vector<Rgb> pixels = std::vector<Rgb>(kImageSize * kImageSize);
    std::string window_id;
    PerturbationId perturbation = PerturbationId::P0;

    Rgb& at(int row, int col) { return pixels[row * kImageSize + col]; }
    const Rgb& at(int row, int col) const { return pixels[row * kImageSize + col]; }
};

inline int pixel_diff_count(const SpectroImage& a, const SpectroImage& b) {
    int n = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i)
        if (!(a.pixels[i] == b.pixels[i])) ++n;
    return n;
}

inline std::uint8_t to_byte(double v) {
    const double r = std::round(v);
    if (r <= 0.0) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

// Blue -> green -> red map with nonzero saturation on the open interval, so
// saturation-scaling perturbations have a visible effect on the spectrogram.
inline Rgb colormap(double v) {
    v = std::clamp(v, 0.0, 1.0);
    return Rgb{to_byte(255.0 * v),
               to_byte(255.0 * (1.0 - std::fabs(2.0 * v - 1.0))),
               to_byte(255.0 * (1.0 - v))};
}

struct Hsv {
    double h = 0.0;  // degrees in [0, 360)
    double s = 0.0;
    double v = 0.0;
};

// Standard hexcone model with channels in [0, 1].
inline Hsv rgb_to_hsv(const Rgb& c) {
    const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    Hsv out;
    out.v = mx;
    out.s = mx > 0.0 ? delta / mx : 0.0;
    if (delta > 0.0) {
        if (mx == r)
            out.h = 60.0 * std::fmod((g - b) / delta, 6.0);
        else if (mx == g)
            out.h = 60.0 * ((b - r) / delta + 2.0);
        else
            out.h = 60.0 * ((r - g) / delta + 4.0);
        if (out.h < 0.0) out.h += 360.0;
    }
    return out;
}

inline Rgb hsv_to_rgb(const Hsv& in) {
    const double c = in.v * in.s;
    const double hp = in.h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0.0, g = 0.0, b = 0.0;
    if (hp < 1.0) { r = c; g = x; }
    else if (hp < 2.0) { r = x; g = c; }
    else if (hp < 3.0) { g = c; b = x; }
    else if (hp < 4.0) { g = x; b = c; }
    else if (hp < 5.0) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = in.v - c;
    return Rgb{to_byte(255.0 * (r + m)), to_byte(255.0 * (g + m)),
               to_byte(255.0 * (b + m))};
}

}  // namespace tsrate
