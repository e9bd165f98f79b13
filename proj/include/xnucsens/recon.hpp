#pragma once

#include <vector>

#include "core.hpp"

namespace xnucsens {

enum class CombinationMethod { roemer, rss };

struct CombinedImage {
    ComplexImage image;
    CombinationMethod method = CombinationMethod::roemer;
};

namespace detail {

inline void check_combination_inputs(const std::vector<ComplexImage>& coil_images,
                                     const CoilSensitivitySet* maps) {
    if (coil_images.empty())
        throw std::invalid_argument("recon: need at least one coil image");
    for (const ComplexImage& img : coil_images)
        if (!same_grid(img.grid, coil_images.front().grid))
            throw std::invalid_argument("recon: coil images must share one grid");
    if (maps) {
        maps->validate();
        if (maps->n_coils() != static_cast<int>(coil_images.size()))
            throw std::invalid_argument("recon: map count must match coil image count");
        if (!same_grid(maps->grid, coil_images.front().grid))
            throw std::invalid_argument("recon: maps and coil images must share one grid");
    }
}

}  // namespace detail

// Sensitivity-weighted (matched filter) combination,
//   m = sum_c conj(rho_c) s_c / sum_c |rho_c|^2,
// with zero output wherever every map vanishes.
inline CombinedImage roemer_combine(const std::vector<ComplexImage>& coil_images,
                                    const CoilSensitivitySet& maps) {
    detail::check_combination_inputs(coil_images, &maps);
    CombinedImage out;
    out.method = CombinationMethod::roemer;
    out.image = ComplexImage(coil_images.front().grid);
    std::size_t pixels = out.image.grid.n_pixels();
    for (std::size_t v = 0; v < pixels; ++v) {
        cdouble num = 0.0;
        double den = 0.0;
        for (std::size_t c = 0; c < coil_images.size(); ++c) {
            cdouble rho = maps.maps[c].samples[v];
            num += std::conj(rho) * coil_images[c].samples[v];
            den += std::norm(rho);
        }
        out.image.samples[v] = den > 0.0 ? num / den : cdouble(0, 0);
    }
    return out;
}

// Root-sum-of-squares combination; real and nonnegative by construction.
inline CombinedImage rss_combine(const std::vector<ComplexImage>& coil_images) {
    detail::check_combination_inputs(coil_images, nullptr);
    CombinedImage out;
    out.method = CombinationMethod::rss;
    out.image = ComplexImage(coil_images.front().grid);
    std::size_t pixels = out.image.grid.n_pixels();
    for (std::size_t v = 0; v < pixels; ++v) {
        double acc = 0.0;
        for (const ComplexImage& img : coil_images) acc += std::norm(img.samples[v]);
        out.image.samples[v] = std::sqrt(acc);
    }
    return out;
}

}  // namespace xnucsens
