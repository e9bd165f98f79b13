#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "core.hpp"

namespace xnucsens {

// One ellipse of the head phantom: additive intensity, half-axes and center
// in normalized [-1, 1] coordinates, rotation in degrees counterclockwise.
struct PhantomEllipse {
    double intensity;
    double half_axis_x;
    double half_axis_y;
    double center_x;
    double center_y;
    double angle_deg;
};

// The standard ten-ellipse Shepp-Logan table with the original (low
// contrast) intensities; overlapping ellipses add.
inline const std::array<PhantomEllipse, 10>& shepp_logan_ellipses() {
    static const std::array<PhantomEllipse, 10> table = {{
        {2.0, 0.69, 0.92, 0.0, 0.0, 0.0},
        {-0.98, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
        {-0.02, 0.1100, 0.3100, 0.22, 0.0, -18.0},
        {-0.02, 0.1600, 0.4100, -0.22, 0.0, 18.0},
        {0.01, 0.2100, 0.2500, 0.0, 0.35, 0.0},
        {0.01, 0.0460, 0.0460, 0.0, 0.10, 0.0},
        {0.01, 0.0460, 0.0460, 0.0, -0.10, 0.0},
        {0.01, 0.0460, 0.0230, -0.08, -0.605, 0.0},
        {0.01, 0.0230, 0.0230, 0.0, -0.605, 0.0},
        {0.01, 0.0230, 0.0460, 0.06, -0.605, 0.0},
    }};
    return table;
}

// Phantom intensity at a point in normalized coordinates. A point on an
// ellipse boundary counts as inside.
inline double shepp_logan_value(double x, double y) {
    double value = 0.0;
    for (const PhantomEllipse& e : shepp_logan_ellipses()) {
        double rad = e.angle_deg * std::numbers::pi / 180.0;
        double c = std::cos(rad), s = std::sin(rad);
        double dx = x - e.center_x, dy = y - e.center_y;
        double u = (dx * c + dy * s) / e.half_axis_x;
        double v = (-dx * s + dy * c) / e.half_axis_y;
        if (u * u + v * v <= 1.0) value += e.intensity;
    }
    return value;
}

// Rasterized phantom sampled at pixel centers over the normalized square
// [-1, 1] x [-1, 1]. The returned grid carries the normalized pixel pitch;
// callers give it a physical scale by resetting grid.pixel_size.
inline RealImage generate_shepp_logan(int width, int height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("phantom: dimensions must be at least 1x1");
    if (width > 16384 || height > 16384)
        throw std::invalid_argument("phantom: dimensions exceed the supported 16384 limit");
    GridSpec grid;
    grid.width = width;
    grid.height = height;
    grid.pixel_size = 2.0 / width;
    RealImage img(grid);
    for (int iy = 0; iy < height; ++iy) {
        double y = (iy + 0.5 - 0.5 * height) * (2.0 / height);
        for (int ix = 0; ix < width; ++ix) {
            double x = (ix + 0.5 - 0.5 * width) * (2.0 / width);
            img.at(ix, iy) = shepp_logan_value(x, y);
        }
    }
    return img;
}

// Voxels with strictly positive intensity.
inline SupportMask support_mask(const RealImage& img) {
    SupportMask mask(img.grid.width, img.grid.height);
    for (int iy = 0; iy < img.grid.height; ++iy)
        for (int ix = 0; ix < img.grid.width; ++ix)
            mask.set(ix, iy, img.at(ix, iy) > 0.0);
    return mask;
}

// Spectral model: a sum of unit-peak Lorentzian lines on an integer bin
// axis. Exactly one line must carry the strict maximum amplitude; that line
// is the dominant resonance.
struct SpectralLine {
    double center_bin;
    double amplitude;
    double fwhm_bins;
    double phase_rad = 0.0;
};

struct SpectrumModel {
    int n_bins = 0;
    std::vector<SpectralLine> lines;

    void validate() const {
        if (n_bins < 1) throw std::invalid_argument("phantom: spectrum needs at least one bin");
        if (lines.empty())
            throw std::invalid_argument("phantom: spectrum needs at least one line");
        for (const SpectralLine& l : lines) {
            if (!(l.amplitude > 0.0))
                throw std::invalid_argument("phantom: line amplitudes must be positive");
            if (!(l.fwhm_bins > 0.0))
                throw std::invalid_argument("phantom: line widths must be positive");
            if (l.center_bin < 0.0 || l.center_bin >= n_bins)
                throw std::invalid_argument("phantom: line centers must lie within the bin axis");
        }
        dominant_line();
    }

    // Index of the line with the strict maximum amplitude.
    std::size_t dominant_line() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < lines.size(); ++i)
            if (lines[i].amplitude > lines[best].amplitude) best = i;
        for (std::size_t i = 0; i < lines.size(); ++i)
            if (i != best && !(lines[i].amplitude < lines[best].amplitude))
                throw std::invalid_argument(
                    "phantom: spectrum must have exactly one dominant line");
        return best;
    }

    int dominant_bin() const {
        double c = lines[dominant_line()].center_bin;
        int bin = static_cast<int>(std::lround(c));
        return bin < n_bins ? bin : n_bins - 1;
    }
};

// Complex bin values of the model spectrum. A line of amplitude A, center c,
// width w and phase p contributes A * e^{ip} / (1 + (2(bin - c)/w)^2).
inline std::vector<cdouble> synthesize_spectrum(const SpectrumModel& model) {
    model.validate();
    std::vector<cdouble> bins(model.n_bins, cdouble(0, 0));
    for (const SpectralLine& l : model.lines) {
        cdouble lead = l.amplitude * cdouble(std::cos(l.phase_rad), std::sin(l.phase_rad));
        for (int b = 0; b < model.n_bins; ++b) {
            double d = 2.0 * (b - l.center_bin) / l.fwhm_bins;
            bins[b] += lead / (1.0 + d * d);
        }
    }
    return bins;
}

// Gamma-variate bolus: zero until arrival, then
// peak * ((t - t0)/(shape*rate))^shape * exp(shape - (t - t0)/rate),
// which attains its maximum `peak_amplitude` at t = t0 + shape*rate.
struct BolusCurve {
    int n_frames = 1;
    double frame_spacing_s = 1.0;
    double arrival_s = 0.0;
    double shape = 2.0;
    double rate_s = 3.0;
    double peak_amplitude = 1.0;

    void validate() const {
        if (n_frames < 1) throw std::invalid_argument("phantom: bolus needs at least one frame");
        if (!(frame_spacing_s > 0.0))
            throw std::invalid_argument("phantom: frame spacing must be positive");
        if (!(shape > 0.0) || !(rate_s > 0.0))
            throw std::invalid_argument("phantom: bolus shape and rate must be positive");
        if (!(peak_amplitude >= 0.0))
            throw std::invalid_argument("phantom: bolus peak must be nonnegative");
    }
};

inline double bolus_amplitude(const BolusCurve& curve, int frame) {
    if (frame < 0 || frame >= curve.n_frames)
        throw std::invalid_argument("phantom: bolus frame index out of range");
    double t = frame * curve.frame_spacing_s - curve.arrival_s;
    if (t <= 0.0) return 0.0;
    double scaled = t / (curve.shape * curve.rate_s);
    return curve.peak_amplitude * std::pow(scaled, curve.shape) *
           std::exp(curve.shape - t / curve.rate_s);
}

}  // namespace xnucsens
