#pragma once

#include <algorithm>
#include <optional>
#include <tuple>
#include <vector>

#include "acquisition.hpp"
#include "core.hpp"

namespace xnucsens {

// One observation address in the (bin, frame, metabolite) index space. The
// estimators are agnostic to which axes the rows sweep; spectral, dynamic
// and metabolite-resolved acquisitions only differ in how rows are built.
struct GeneralizedIndex {
    int bin = 0;
    int frame = 0;
    int metabolite = 0;

    bool operator==(const GeneralizedIndex&) const = default;
};

enum class IndexSetMode { spectral, spectral_time, metabolite_time, custom };

struct IndexSet {
    IndexSetMode mode = IndexSetMode::custom;
    std::vector<GeneralizedIndex> entries;

    void validate(const MultiCoilSpectralDataset& data) const {
        if (entries.empty())
            throw std::invalid_argument("estimators: index set must not be empty");
        for (const GeneralizedIndex& e : entries) {
            if (e.bin < 0 || e.bin >= data.n_bins || e.frame < 0 || e.frame >= data.n_frames ||
                e.metabolite < 0 || e.metabolite >= data.n_metabolites)
                throw std::invalid_argument("estimators: index set entry out of dataset bounds");
        }
        std::vector<GeneralizedIndex> sorted = entries;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            return std::tie(a.bin, a.frame, a.metabolite) < std::tie(b.bin, b.frame, b.metabolite);
        });
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("estimators: index set entries must be unique");
    }
};

// All spectral bins of one frame and metabolite.
inline IndexSet make_spectral_set(int n_bins, int frame = 0, int metabolite = 0) {
    if (n_bins < 1) throw std::invalid_argument("estimators: need at least one bin");
    IndexSet set;
    set.mode = IndexSetMode::spectral;
    set.entries.reserve(n_bins);
    for (int p = 0; p < n_bins; ++p) set.entries.push_back({p, frame, metabolite});
    return set;
}

// All (bin, frame) pairs of one metabolite.
inline IndexSet make_spectral_time_set(int n_bins, int n_frames, int metabolite = 0) {
    if (n_bins < 1 || n_frames < 1)
        throw std::invalid_argument("estimators: need at least one bin and frame");
    IndexSet set;
    set.mode = IndexSetMode::spectral_time;
    set.entries.reserve(static_cast<std::size_t>(n_bins) * n_frames);
    for (int p = 0; p < n_bins; ++p)
        for (int t = 0; t < n_frames; ++t) set.entries.push_back({p, t, metabolite});
    return set;
}

// All (metabolite, frame) pairs at one spectral bin.
inline IndexSet make_metabolite_time_set(int n_metabolites, int n_frames, int bin = 0) {
    if (n_metabolites < 1 || n_frames < 1)
        throw std::invalid_argument("estimators: need at least one metabolite and frame");
    IndexSet set;
    set.mode = IndexSetMode::metabolite_time;
    set.entries.reserve(static_cast<std::size_t>(n_metabolites) * n_frames);
    for (int m = 0; m < n_metabolites; ++m)
        for (int t = 0; t < n_frames; ++t) set.entries.push_back({bin, t, m});
    return set;
}

// Observation matrix of one voxel: row n is index-set entry n, column c is
// coil c.
struct VoxelObservations {
    int n_rows = 0;
    int n_coils = 0;
    std::vector<cdouble> values;

    VoxelObservations() = default;
    VoxelObservations(int rows, int coils)
        : n_rows(rows), n_coils(coils),
          values(static_cast<std::size_t>(rows) * coils, cdouble(0, 0)) {
        if (rows < 1 || coils < 1)
            throw std::invalid_argument("estimators: observations need at least one row and coil");
    }

    cdouble& at(int n, int c) { return values[static_cast<std::size_t>(n) * n_coils + c]; }
    cdouble at(int n, int c) const { return values[static_cast<std::size_t>(n) * n_coils + c]; }
};

enum class RefPeakBinMode { shared_peak, per_coil_max };
enum class RssRegressorMode { magnitude_squared, literal_square };
enum class EstimationMethod { ref_peak, l2_optimal };

struct EstimatorConfig {
    RefPeakBinMode refpeak_bin_mode = RefPeakBinMode::shared_peak;
    RssRegressorMode rss_regressor_mode = RssRegressorMode::magnitude_squared;
    // A voxel is declared vacant when its observation energy falls below
    // this fraction of the grid maximum; 0 disables the data-driven mask.
    double support_threshold = 0.0;

    void validate() const {
        if (!(support_threshold >= 0.0) || support_threshold >= 1.0)
            throw std::invalid_argument("estimators: support threshold must lie in [0, 1)");
    }
};

// Reference-peak estimate of one voxel: take the reference value A_c of each
// coil at the peak observation row, then
//   rho_c = conj(A_c) / sqrt(sum_c' |A_c'|^2).
// In shared-peak mode the row of maximum across-coil energy serves every
// coil; in per-coil mode each coil picks its own maximum-magnitude row (ties
// resolve to the lowest row). All-zero observations are a vacant voxel.
inline std::optional<std::vector<cdouble>> ref_peak_voxel(const VoxelObservations& obs,
                                                          const EstimatorConfig& config = {}) {
    std::vector<cdouble> reference(obs.n_coils);
    if (config.refpeak_bin_mode == RefPeakBinMode::shared_peak) {
        int best = 0;
        double best_energy = -1.0;
        for (int n = 0; n < obs.n_rows; ++n) {
            double energy = 0.0;
            for (int c = 0; c < obs.n_coils; ++c) energy += std::norm(obs.at(n, c));
            if (energy > best_energy) {
                best_energy = energy;
                best = n;
            }
        }
        for (int c = 0; c < obs.n_coils; ++c) reference[c] = obs.at(best, c);
    } else {
        for (int c = 0; c < obs.n_coils; ++c) {
            int best = 0;
            double best_mag = -1.0;
            for (int n = 0; n < obs.n_rows; ++n) {
                double mag = std::norm(obs.at(n, c));
                if (mag > best_mag) {
                    best_mag = mag;
                    best = n;
                }
            }
            reference[c] = obs.at(best, c);
        }
    }
    double norm2 = 0.0;
    for (const cdouble& a : reference) norm2 += std::norm(a);
    if (norm2 == 0.0) return std::nullopt;
    double inv = 1.0 / std::sqrt(norm2);
    std::vector<cdouble> rho(obs.n_coils);
    for (int c = 0; c < obs.n_coils; ++c) rho[c] = std::conj(reference[c]) * inv;
    return rho;
}

// Root-sum-of-squares regressor over coils, one value per observation row.
// The default combines magnitudes, a_n = sqrt(sum_c |v_nc|^2), and is real
// and nonnegative. The literal mode takes the principal square root of the
// unsquared coil sum, a_n = sqrt(sum_c v_nc^2), and is complex in general.
inline std::vector<cdouble> build_rss_regressor(
    const VoxelObservations& obs, RssRegressorMode mode = RssRegressorMode::magnitude_squared) {
    std::vector<cdouble> a(obs.n_rows);
    for (int n = 0; n < obs.n_rows; ++n) {
        if (mode == RssRegressorMode::magnitude_squared) {
            double acc = 0.0;
            for (int c = 0; c < obs.n_coils; ++c) acc += std::norm(obs.at(n, c));
            a[n] = std::sqrt(acc);
        } else {
            cdouble acc = 0.0;
            for (int c = 0; c < obs.n_coils; ++c) acc += obs.at(n, c) * obs.at(n, c);
            a[n] = std::sqrt(acc);
        }
    }
    return a;
}

// Least-squares fit of each coil column against the RSS regressor,
//   rho_c = (a^H v_c) / ||a||^2,
// the minimum-norm solution of the one-regressor problem. The estimate is
// deliberately not re-normalized, so voxels whose observations are weak
// against the regressor keep small magnitudes. A zero regressor is a vacant
// voxel.
inline std::optional<std::vector<cdouble>> l2_optimal_voxel(const VoxelObservations& obs,
                                                            const EstimatorConfig& config = {}) {
    std::vector<cdouble> a = build_rss_regressor(obs, config.rss_regressor_mode);
    double denom = 0.0;
    for (const cdouble& an : a) denom += std::norm(an);
    if (denom == 0.0) return std::nullopt;
    std::vector<cdouble> rho(obs.n_coils, cdouble(0, 0));
    for (int n = 0; n < obs.n_rows; ++n) {
        cdouble an = std::conj(a[n]);
        for (int c = 0; c < obs.n_coils; ++c) rho[c] += an * obs.at(n, c);
    }
    for (cdouble& r : rho) r /= denom;
    return rho;
}

// Estimate one sensitivity map per coil from an image-space dataset. Voxels
// below the energy threshold, and voxels the estimator reports vacant, are
// assigned zero in every coil.
inline CoilSensitivitySet estimate_maps(const MultiCoilSpectralDataset& data,
                                        EstimationMethod method, const IndexSet& index_set,
                                        const EstimatorConfig& config = {}) {
    if (data.domain != Domain::image)
        throw std::invalid_argument("estimators: map estimation expects image-space data");
    config.validate();
    index_set.validate(data);

    int n_rows = static_cast<int>(index_set.entries.size());
    int n_coils = data.n_coils;
    std::vector<const cdouble*> planes(static_cast<std::size_t>(n_rows) * n_coils);
    for (int n = 0; n < n_rows; ++n) {
        const GeneralizedIndex& e = index_set.entries[n];
        for (int c = 0; c < n_coils; ++c)
            planes[static_cast<std::size_t>(n) * n_coils + c] =
                data.slice(c, e.bin, e.frame, e.metabolite);
    }

    std::size_t pixels = data.grid.n_pixels();
    std::vector<double> energy(pixels, 0.0);
    double max_energy = 0.0;
    for (std::size_t v = 0; v < pixels; ++v) {
        double acc = 0.0;
        for (const cdouble* plane : planes) acc += std::norm(plane[v]);
        energy[v] = acc;
        max_energy = std::max(max_energy, acc);
    }

    CoilSensitivitySet out;
    out.grid = data.grid;
    out.maps.assign(n_coils, ComplexImage(data.grid));
    out.normalized = false;

    VoxelObservations obs(n_rows, n_coils);
    for (std::size_t v = 0; v < pixels; ++v) {
        if (energy[v] < config.support_threshold * max_energy) continue;
        for (std::size_t i = 0; i < planes.size(); ++i) obs.values[i] = planes[i][v];
        std::optional<std::vector<cdouble>> rho =
            method == EstimationMethod::ref_peak ? ref_peak_voxel(obs, config)
                                                 : l2_optimal_voxel(obs, config);
        if (!rho) continue;
        for (int c = 0; c < n_coils; ++c) out.maps[c].samples[v] = (*rho)[c];
    }
    return out;
}

}  // namespace xnucsens
