#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace xnucsens {

inline constexpr const char* version = "0.1.0";

using cdouble = std::complex<double>;

// Thrown by file readers when a byte stream does not match the container
// format. Carries the byte offset at which the inconsistency was detected.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& msg, std::size_t offset)
        : std::runtime_error("io: " + msg + " (offset " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Thrown when a field evaluation point coincides with a conductor segment.
class SingularGeometryError : public std::runtime_error {
public:
    explicit SingularGeometryError(const std::string& msg)
        : std::runtime_error("coilsim: " + msg) {}
};

// Thrown when per-voxel normalization meets a zero-norm voxel inside the
// support mask.
class DegenerateVoxelError : public std::runtime_error {
public:
    explicit DegenerateVoxelError(const std::string& msg)
        : std::runtime_error("coilsim: " + msg) {}
};

// Uniform pixel grid. Pixel (ix, iy) has its center at
//   x = origin_x + (ix + 0.5 - width/2)  * pixel_size
//   y = origin_y + (iy + 0.5 - height/2) * pixel_size
// so the point set is symmetric about the origin for even and odd sizes
// alike. The grid lies in the plane z = plane_z.
struct GridSpec {
    int width = 0;
    int height = 0;
    double pixel_size = 1.0;   // meters per pixel
    double origin_x = 0.0;     // meters, grid center
    double origin_y = 0.0;
    double plane_z = 0.0;

    void validate() const {
        if (width < 1 || height < 1)
            throw std::invalid_argument("core: grid dimensions must be at least 1x1");
        if (!(pixel_size > 0.0))
            throw std::invalid_argument("core: pixel_size must be positive");
    }

    std::size_t n_pixels() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }

    double pixel_x(int ix) const { return origin_x + (ix + 0.5 - 0.5 * width) * pixel_size; }
    double pixel_y(int iy) const { return origin_y + (iy + 0.5 - 0.5 * height) * pixel_size; }
};

inline bool same_grid(const GridSpec& a, const GridSpec& b) {
    return a.width == b.width && a.height == b.height && a.pixel_size == b.pixel_size &&
           a.origin_x == b.origin_x && a.origin_y == b.origin_y && a.plane_z == b.plane_z;
}

// Real-valued image on a GridSpec, row-major (y outer, x inner).
struct RealImage {
    GridSpec grid;
    std::vector<double> samples;

    RealImage() = default;
    explicit RealImage(const GridSpec& g) : grid(g) {
        grid.validate();
        samples.assign(grid.n_pixels(), 0.0);
    }

    double& at(int ix, int iy) { return samples[static_cast<std::size_t>(iy) * grid.width + ix]; }
    double at(int ix, int iy) const {
        return samples[static_cast<std::size_t>(iy) * grid.width + ix];
    }
};

// Complex-valued image on a GridSpec, row-major (y outer, x inner).
struct ComplexImage {
    GridSpec grid;
    std::vector<cdouble> samples;

    ComplexImage() = default;
    explicit ComplexImage(const GridSpec& g) : grid(g) {
        grid.validate();
        samples.assign(grid.n_pixels(), cdouble(0.0, 0.0));
    }

    cdouble& at(int ix, int iy) {
        return samples[static_cast<std::size_t>(iy) * grid.width + ix];
    }
    cdouble at(int ix, int iy) const {
        return samples[static_cast<std::size_t>(iy) * grid.width + ix];
    }
};

// Boolean region on a grid, row-major; used for phantom support and ROIs.
struct SupportMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> inside;

    SupportMask() = default;
    SupportMask(int w, int h) : width(w), height(h) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("core: mask dimensions must be at least 1x1");
        inside.assign(static_cast<std::size_t>(w) * h, 0);
    }

    bool at(int ix, int iy) const {
        return inside[static_cast<std::size_t>(iy) * width + ix] != 0;
    }
    void set(int ix, int iy, bool v) {
        inside[static_cast<std::size_t>(iy) * width + ix] = v ? 1 : 0;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto v : inside) n += (v != 0);
        return n;
    }
};

// One complex sensitivity map per coil, all on a shared grid. `normalized`
// records whether per-voxel unit-norm scaling has been applied.
struct CoilSensitivitySet {
    GridSpec grid;
    std::vector<ComplexImage> maps;
    bool normalized = false;

    int n_coils() const { return static_cast<int>(maps.size()); }

    void validate() const {
        grid.validate();
        if (maps.empty())
            throw std::invalid_argument("core: sensitivity set must hold at least one coil");
        for (const auto& m : maps)
            if (!same_grid(m.grid, grid))
                throw std::invalid_argument("core: sensitivity maps must share one grid");
    }
};

// Number of representable doubles strictly between a and b (0 when equal).
// Used by scale-invariance and exactness tests; infinite/NaN inputs yield
// the maximum distance.
inline std::uint64_t ulp_distance(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) return UINT64_MAX;
    if (a == b) return 0;  // covers +0/-0
    auto to_ordered = [](double x) -> std::int64_t {
        std::int64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        return bits < 0 ? std::int64_t(0x8000000000000000ull) - bits : bits;
    };
    std::int64_t ia = to_ordered(a), ib = to_ordered(b);
    std::uint64_t d = ia > ib ? static_cast<std::uint64_t>(ia) - static_cast<std::uint64_t>(ib)
                              : static_cast<std::uint64_t>(ib) - static_cast<std::uint64_t>(ia);
    return d;
}

inline std::uint64_t ulp_distance(cdouble a, cdouble b) {
    std::uint64_t dr = ulp_distance(a.real(), b.real());
    std::uint64_t di = ulp_distance(a.imag(), b.imag());
    return dr > di ? dr : di;
}

}  // namespace xnucsens
