#pragma once

#include <limits>
#include <vector>

#include "core.hpp"
#include "recon.hpp"

namespace xnucsens {

struct MseReport {
    double aggregate = 0.0;            // mean over supported voxels and coils
    std::vector<double> per_coil;      // mean over supported voxels, one per coil
    std::size_t n_voxels = 0;          // supported voxel count
};

// Mean squared error between two map sets over the supported voxels,
//   mse = mean_{v in support, c} |est_c(v) - truth_c(v)|^2.
// With `phase_align` every voxel's estimate vector is first rotated by the
// global phase that best matches the truth, e^{-i arg(sum_c conj(truth_c)
// est_c)}, which removes the per-voxel phase ambiguity left by magnitude
// observation models and never increases the error.
inline MseReport map_mse(const CoilSensitivitySet& est, const CoilSensitivitySet& truth,
                         const SupportMask& support, bool phase_align = false) {
    est.validate();
    truth.validate();
    if (est.n_coils() != truth.n_coils())
        throw std::invalid_argument("metrics: map sets must have equal coil counts");
    if (!same_grid(est.grid, truth.grid))
        throw std::invalid_argument("metrics: map sets must share one grid");
    if (support.width != est.grid.width || support.height != est.grid.height)
        throw std::invalid_argument("metrics: support mask does not match the map grid");
    std::size_t n_voxels = support.count();
    if (n_voxels == 0)
        throw std::invalid_argument("metrics: support mask must contain at least one voxel");

    int n_coils = est.n_coils();
    MseReport report;
    report.per_coil.assign(n_coils, 0.0);
    report.n_voxels = n_voxels;
    std::size_t pixels = est.grid.n_pixels();
    for (std::size_t v = 0; v < pixels; ++v) {
        if (!support.inside[v]) continue;
        cdouble rotation = 1.0;
        if (phase_align) {
            cdouble w = 0.0;
            for (int c = 0; c < n_coils; ++c)
                w += std::conj(truth.maps[c].samples[v]) * est.maps[c].samples[v];
            double mag = std::abs(w);
            if (mag > 0.0) rotation = std::conj(w) / mag;
        }
        for (int c = 0; c < n_coils; ++c) {
            cdouble diff = rotation * est.maps[c].samples[v] - truth.maps[c].samples[v];
            report.per_coil[c] += std::norm(diff);
        }
    }
    for (double& m : report.per_coil) m /= static_cast<double>(n_voxels);
    for (double m : report.per_coil) report.aggregate += m;
    report.aggregate /= n_coils;
    return report;
}

struct RoiSnrReport {
    double snr = 0.0;
    bool unbounded = false;    // noise ROI had zero spread
    double signal_mean = 0.0;  // mean magnitude over the signal ROI
    double noise_std = 0.0;    // standard deviation of noise ROI real parts
};

// Region-based SNR of a combined image: mean magnitude over the signal ROI
// divided by the standard deviation of the real components in the noise ROI.
// The ROIs must be nonempty and disjoint. A spread-free noise ROI (e.g. a
// noiseless or nulled region) yields an unbounded report.
inline RoiSnrReport roi_snr(const CombinedImage& combined, const SupportMask& signal_roi,
                            const SupportMask& noise_roi) {
    const ComplexImage& img = combined.image;
    if (signal_roi.width != img.grid.width || signal_roi.height != img.grid.height ||
        noise_roi.width != img.grid.width || noise_roi.height != img.grid.height)
        throw std::invalid_argument("metrics: ROI dimensions must match the image");
    std::size_t pixels = img.grid.n_pixels();
    std::size_t n_signal = 0, n_noise = 0;
    for (std::size_t v = 0; v < pixels; ++v) {
        if (signal_roi.inside[v] && noise_roi.inside[v])
            throw std::invalid_argument("metrics: signal and noise ROIs must be disjoint");
        n_signal += signal_roi.inside[v] != 0;
        n_noise += noise_roi.inside[v] != 0;
    }
    if (n_signal == 0 || n_noise == 0)
        throw std::invalid_argument("metrics: ROIs must be nonempty");

    RoiSnrReport report;
    for (std::size_t v = 0; v < pixels; ++v)
        if (signal_roi.inside[v]) report.signal_mean += std::abs(img.samples[v]);
    report.signal_mean /= static_cast<double>(n_signal);

    double mean_re = 0.0;
    for (std::size_t v = 0; v < pixels; ++v)
        if (noise_roi.inside[v]) mean_re += img.samples[v].real();
    mean_re /= static_cast<double>(n_noise);
    double var = 0.0;
    for (std::size_t v = 0; v < pixels; ++v)
        if (noise_roi.inside[v]) {
            double d = img.samples[v].real() - mean_re;
            var += d * d;
        }
    report.noise_std = std::sqrt(var / static_cast<double>(n_noise));

    if (report.noise_std == 0.0) {
        report.unbounded = true;
        report.snr = std::numeric_limits<double>::infinity();
    } else {
        report.snr = report.signal_mean / report.noise_std;
    }
    return report;
}

}  // namespace xnucsens
