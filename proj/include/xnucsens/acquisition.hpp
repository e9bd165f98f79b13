#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "core.hpp"
#include "fft.hpp"
#include "phantom.hpp"
#include "rng.hpp"

namespace xnucsens {

enum class Domain : std::uint8_t { kspace = 0, image = 1 };

// Multi-coil spectroscopic acquisition: coil x spectral bin x time frame x
// metabolite, each holding one 2-D plane on a shared grid. Samples are laid
// out row-major in (coil, bin, frame, metabolite, y, x) order, the same
// order the file container uses.
struct MultiCoilSpectralDataset {
    int n_coils = 0;
    int n_bins = 0;
    int n_frames = 0;
    int n_metabolites = 0;
    GridSpec grid;
    Domain domain = Domain::kspace;
    std::vector<cdouble> samples;

    MultiCoilSpectralDataset() = default;
    MultiCoilSpectralDataset(int coils, int bins, int frames, int metabolites, const GridSpec& g,
                             Domain d)
        : n_coils(coils), n_bins(bins), n_frames(frames), n_metabolites(metabolites), grid(g),
          domain(d) {
        validate_dims();
        samples.assign(n_slices() * grid.n_pixels(), cdouble(0, 0));
    }

    void validate_dims() const {
        grid.validate();
        if (n_coils < 1 || n_bins < 1 || n_frames < 1 || n_metabolites < 1)
            throw std::invalid_argument("acquisition: dataset dimensions must be at least 1");
        double total = static_cast<double>(n_coils) * n_bins * n_frames * n_metabolites *
                       grid.width * grid.height;
        if (total > static_cast<double>(std::numeric_limits<std::int32_t>::max()))
            throw std::invalid_argument("acquisition: dataset exceeds the supported size");
    }

    std::size_t n_slices() const {
        return static_cast<std::size_t>(n_coils) * n_bins * n_frames * n_metabolites;
    }

    std::size_t slice_index(int c, int p, int t, int m) const {
        return ((static_cast<std::size_t>(c) * n_bins + p) * n_frames + t) * n_metabolites + m;
    }

    cdouble* slice(int c, int p, int t, int m) {
        return samples.data() + slice_index(c, p, t, m) * grid.n_pixels();
    }
    const cdouble* slice(int c, int p, int t, int m) const {
        return samples.data() + slice_index(c, p, t, m) * grid.n_pixels();
    }
};

// Noise request: `snr` is peak image signal over per-component noise sigma;
// infinity means no noise. Streams are fully determined by `seed`.
struct NoiseSpec {
    double snr = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;

    void validate() const {
        if (!(snr > 0.0)) throw std::invalid_argument("acquisition: snr must be positive");
    }
};

// K-space of a single-frame, single-metabolite acquisition: the coil-c,
// bin-p plane is the unitary 2-D DFT of phantom * map_c scaled by the
// spectrum value at bin p.
inline MultiCoilSpectralDataset forward_encode(const RealImage& phantom,
                                               const CoilSensitivitySet& maps,
                                               const std::vector<cdouble>& spectrum_bins) {
    maps.validate();
    if (!same_grid(phantom.grid, maps.grid))
        throw std::invalid_argument("acquisition: phantom and maps must share one grid");
    if (spectrum_bins.empty())
        throw std::invalid_argument("acquisition: spectrum must have at least one bin");

    int n_coils = maps.n_coils();
    int n_bins = static_cast<int>(spectrum_bins.size());
    MultiCoilSpectralDataset data(n_coils, n_bins, 1, 1, phantom.grid, Domain::kspace);
    std::size_t pixels = phantom.grid.n_pixels();
    std::vector<cdouble> coil_kspace(pixels);
    for (int c = 0; c < n_coils; ++c) {
        for (std::size_t v = 0; v < pixels; ++v)
            coil_kspace[v] = phantom.samples[v] * maps.maps[c].samples[v];
        dft_2d_unitary(coil_kspace.data(), phantom.grid.width, phantom.grid.height, false);
        for (int p = 0; p < n_bins; ++p) {
            cdouble* out = data.slice(c, p, 0, 0);
            for (std::size_t v = 0; v < pixels; ++v) out[v] = coil_kspace[v] * spectrum_bins[p];
        }
    }
    return data;
}

// Dynamic acquisition: one spectrum per metabolite (all of equal length) and
// a gamma-variate bolus weighting every time frame. Frame t of metabolite m
// is bolus(t) * spectrum_m(p) * DFT(phantom * map_c).
inline MultiCoilSpectralDataset simulate_dynamic(const RealImage& phantom,
                                                 const CoilSensitivitySet& maps,
                                                 const std::vector<std::vector<cdouble>>& spectra,
                                                 const BolusCurve& bolus) {
    maps.validate();
    bolus.validate();
    if (!same_grid(phantom.grid, maps.grid))
        throw std::invalid_argument("acquisition: phantom and maps must share one grid");
    if (spectra.empty())
        throw std::invalid_argument("acquisition: need at least one metabolite spectrum");
    std::size_t n_bins = spectra.front().size();
    if (n_bins == 0)
        throw std::invalid_argument("acquisition: spectra must have at least one bin");
    for (const auto& s : spectra)
        if (s.size() != n_bins)
            throw std::invalid_argument("acquisition: metabolite spectra must share one length");

    int n_coils = maps.n_coils();
    int n_mets = static_cast<int>(spectra.size());
    MultiCoilSpectralDataset data(n_coils, static_cast<int>(n_bins), bolus.n_frames, n_mets,
                                  phantom.grid, Domain::kspace);
    std::vector<double> weights(bolus.n_frames);
    for (int t = 0; t < bolus.n_frames; ++t) weights[t] = bolus_amplitude(bolus, t);

    std::size_t pixels = phantom.grid.n_pixels();
    std::vector<cdouble> coil_kspace(pixels);
    for (int c = 0; c < n_coils; ++c) {
        for (std::size_t v = 0; v < pixels; ++v)
            coil_kspace[v] = phantom.samples[v] * maps.maps[c].samples[v];
        dft_2d_unitary(coil_kspace.data(), phantom.grid.width, phantom.grid.height, false);
        for (int p = 0; p < static_cast<int>(n_bins); ++p)
            for (int t = 0; t < bolus.n_frames; ++t)
                for (int m = 0; m < n_mets; ++m) {
                    cdouble scale = spectra[m][p] * weights[t];
                    cdouble* out = data.slice(c, p, t, m);
                    for (std::size_t v = 0; v < pixels; ++v) out[v] = coil_kspace[v] * scale;
                }
    }
    return data;
}

// Spectral bin carrying the most energy; ties resolve to the lowest index.
inline int dominant_bin_of(const MultiCoilSpectralDataset& data) {
    std::size_t pixels = data.grid.n_pixels();
    int best = 0;
    double best_energy = -1.0;
    for (int p = 0; p < data.n_bins; ++p) {
        double energy = 0.0;
        for (int c = 0; c < data.n_coils; ++c)
            for (int t = 0; t < data.n_frames; ++t)
                for (int m = 0; m < data.n_metabolites; ++m) {
                    const cdouble* s = data.slice(c, p, t, m);
                    for (std::size_t v = 0; v < pixels; ++v) energy += std::norm(s[v]);
                }
        if (energy > best_energy) {
            best_energy = energy;
            best = p;
        }
    }
    return best;
}

// Maximum image-domain signal magnitude across coils, frames and metabolites
// at the dominant spectral bin; this is the S_peak of the SNR definition.
inline double image_peak_at_dominant_bin(const MultiCoilSpectralDataset& data) {
    if (data.domain != Domain::kspace)
        throw std::invalid_argument("acquisition: peak lookup expects k-space data");
    int p = dominant_bin_of(data);
    std::size_t pixels = data.grid.n_pixels();
    std::vector<cdouble> plane(pixels);
    double peak = 0.0;
    for (int c = 0; c < data.n_coils; ++c)
        for (int t = 0; t < data.n_frames; ++t)
            for (int m = 0; m < data.n_metabolites; ++m) {
                const cdouble* s = data.slice(c, p, t, m);
                std::copy(s, s + pixels, plane.begin());
                dft_2d_unitary(plane.data(), data.grid.width, data.grid.height, true);
                for (std::size_t v = 0; v < pixels; ++v)
                    peak = std::max(peak, std::abs(plane[v]));
            }
    return peak;
}

// Add complex Gaussian noise of fixed per-component sigma to every k-space
// sample, in storage order, from the stream addressed by `seed`.
inline MultiCoilSpectralDataset add_noise_with_sigma(const MultiCoilSpectralDataset& data,
                                                     double sigma, std::uint64_t seed) {
    if (data.domain != Domain::kspace)
        throw std::invalid_argument("acquisition: noise is injected in k-space");
    if (!(sigma >= 0.0)) throw std::invalid_argument("acquisition: sigma must be nonnegative");
    MultiCoilSpectralDataset out = data;
    if (sigma == 0.0) return out;
    SeededRng rng(seed);
    for (auto& z : out.samples) z += sigma * rng.next_complex_gaussian();
    return out;
}

// Add noise at a requested SNR, where sigma = S_peak / snr with S_peak the
// image-domain peak at the dominant bin. Infinite SNR returns the input
// unchanged.
inline MultiCoilSpectralDataset add_noise(const MultiCoilSpectralDataset& data,
                                          const NoiseSpec& spec) {
    spec.validate();
    if (data.domain != Domain::kspace)
        throw std::invalid_argument("acquisition: noise is injected in k-space");
    if (std::isinf(spec.snr)) return data;
    double sigma = image_peak_at_dominant_bin(data) / spec.snr;
    return add_noise_with_sigma(data, sigma, spec.seed);
}

// Plane-by-plane unitary inverse DFT back to image space.
inline MultiCoilSpectralDataset inverse_recon(const MultiCoilSpectralDataset& data) {
    if (data.domain != Domain::kspace)
        throw std::invalid_argument("acquisition: inverse recon expects k-space data");
    MultiCoilSpectralDataset out = data;
    std::size_t pixels = data.grid.n_pixels();
    for (std::size_t s = 0; s < data.n_slices(); ++s)
        dft_2d_unitary(out.samples.data() + s * pixels, data.grid.width, data.grid.height, true);
    out.domain = Domain::image;
    return out;
}

}  // namespace xnucsens
