#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "core.hpp"
#include "linalg.hpp"

namespace xnucsens {

inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;  // vacuum permeability, T*m/A

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

// Rectangular current loop given by its four corners in traversal order;
// the current (amperes) flows c0 -> c1 -> c2 -> c3 -> c0.
struct CoilGeometry {
    std::array<Vec3, 4> corners;
    double current = 1.0;

    void validate() const {
        std::array<Vec3, 4> edges;
        for (int i = 0; i < 4; ++i) edges[i] = corners[(i + 1) % 4] - corners[i];
        Vec3 normal = cross(edges[0], edges[1]);
        double area = norm(normal);
        if (!(area > 0.0))
            throw std::invalid_argument("coilsim: coil corners span no area");
        for (int i = 0; i < 4; ++i) {
            double a = norm(edges[i]), b = norm(edges[(i + 1) % 4]);
            if (!(a > 0.0) || !(b > 0.0))
                throw std::invalid_argument("coilsim: coil has a zero-length edge");
            if (std::abs(dot(edges[i], edges[(i + 1) % 4])) > 1e-9 * a * b)
                throw std::invalid_argument(
                    "coilsim: consecutive coil edges must be perpendicular");
        }
        double off_plane = std::abs(dot(corners[3] - corners[0], normal)) / area;
        if (off_plane > 1e-9)
            throw std::invalid_argument("coilsim: coil corners must be coplanar");
    }
};

// Rectangular coils on a ring of diameter `opposite_distance` around the
// z axis, centers in the plane z = plane_offset. Coil k sits at azimuth
// 2*pi*k/n with its face normal pointing radially, spanning the tangential
// and z directions.
inline std::vector<CoilGeometry> place_coils_ring(int n_coils, double opposite_distance,
                                                  double coil_width, double coil_height,
                                                  double plane_offset = 0.0) {
    if (n_coils < 1) throw std::invalid_argument("coilsim: need at least one coil");
    if (!(opposite_distance > 0.0))
        throw std::invalid_argument("coilsim: opposite_distance must be positive");
    if (!(coil_width > 0.0) || !(coil_height > 0.0))
        throw std::invalid_argument("coilsim: coil dimensions must be positive");
    double radius = 0.5 * opposite_distance;
    std::vector<CoilGeometry> coils;
    coils.reserve(n_coils);
    for (int k = 0; k < n_coils; ++k) {
        double theta = 2.0 * std::numbers::pi * k / n_coils;
        Vec3 center{radius * std::cos(theta), radius * std::sin(theta), plane_offset};
        Vec3 tangent{-std::sin(theta), std::cos(theta), 0.0};
        Vec3 axial{0.0, 0.0, 1.0};
        Vec3 dw = 0.5 * coil_width * tangent;
        Vec3 dh = 0.5 * coil_height * axial;
        CoilGeometry coil;
        coil.corners = {center + dw + dh, center - dw + dh, center - dw - dh, center + dw - dh};
        coil.validate();
        coils.push_back(coil);
    }
    return coils;
}

// Magnetic field of a straight finite segment from a to b carrying unit
// current, in the closed form
//   B = (mu0/4pi) * (Ri + Rf) / (Ri*Rf*(Ri*Rf + Ri.Rf)) * (Ri x Rf)
// which stays finite and accurate everywhere off the segment.
inline Vec3 segment_field(Vec3 a, Vec3 b, Vec3 p) {
    Vec3 ri = p - a;
    Vec3 rf = p - b;
    double mri = norm(ri), mrf = norm(rf);
    double denom = mri * mrf * (mri * mrf + dot(ri, rf));
    if (!(denom > 1e-300))
        throw SingularGeometryError("field requested on a conductor segment");
    double lead = mu0 / (4.0 * std::numbers::pi) * (mri + mrf) / denom;
    return lead * cross(ri, rf);
}

inline Vec3 loop_field(const CoilGeometry& coil, Vec3 p) {
    Vec3 b{0, 0, 0};
    for (int i = 0; i < 4; ++i) b = b + segment_field(coil.corners[i], coil.corners[(i + 1) % 4], p);
    return coil.current * b;
}

inline double point_segment_distance(Vec3 a, Vec3 b, Vec3 p) {
    Vec3 ab = b - a;
    double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    return norm(p - (a + t * ab));
}

inline double min_conductor_distance(const CoilGeometry& coil, Vec3 p) {
    double best = point_segment_distance(coil.corners[0], coil.corners[1], p);
    for (int i = 1; i < 4; ++i) {
        double d = point_segment_distance(coil.corners[i], coil.corners[(i + 1) % 4], p);
        if (d < best) best = d;
    }
    return best;
}

// Complex sensitivity of one coil over a grid: Bx - i*By evaluated at every
// pixel center in the plane z = grid.plane_z. Every grid point must keep a
// clearance of 1e-6 m from the coil conductors.
inline ComplexImage biot_savart_map(const CoilGeometry& coil, const GridSpec& grid) {
    grid.validate();
    coil.validate();
    ComplexImage map(grid);
    for (int iy = 0; iy < grid.height; ++iy) {
        for (int ix = 0; ix < grid.width; ++ix) {
            Vec3 p{grid.pixel_x(ix), grid.pixel_y(iy), grid.plane_z};
            if (min_conductor_distance(coil, p) <= 1e-6) {
                std::ostringstream msg;
                msg << "grid point (" << ix << ", " << iy << ") at (" << p.x << ", " << p.y
                    << ", " << p.z << ") lies within 1e-6 m of a conductor";
                throw SingularGeometryError(msg.str());
            }
            Vec3 b = loop_field(coil, p);
            map.at(ix, iy) = cdouble(b.x, -b.y);
        }
    }
    return map;
}

inline CoilSensitivitySet simulate_coil_maps(const std::vector<CoilGeometry>& coils,
                                             const GridSpec& grid) {
    if (coils.empty()) throw std::invalid_argument("coilsim: need at least one coil");
    CoilSensitivitySet set;
    set.grid = grid;
    set.maps.reserve(coils.size());
    for (const CoilGeometry& c : coils) set.maps.push_back(biot_savart_map(c, grid));
    set.normalized = false;
    return set;
}

// Maps stacked as a tall matrix: row v is the row-major flattened pixel
// index and column c is the coil, so reshaping column c recovers map c.
inline std::vector<cdouble> pack_sensitivity_matrix(const CoilSensitivitySet& set) {
    set.validate();
    std::size_t pixels = set.grid.n_pixels();
    int cols = set.n_coils();
    std::vector<cdouble> s(pixels * cols);
    for (int c = 0; c < cols; ++c)
        for (std::size_t v = 0; v < pixels; ++v) s[v * cols + c] = set.maps[c].samples[v];
    return s;
}

inline CoilSensitivitySet unpack_sensitivity_matrix(const std::vector<cdouble>& s,
                                                    const GridSpec& grid, int n_coils) {
    grid.validate();
    std::size_t pixels = grid.n_pixels();
    if (n_coils < 1 || s.size() != pixels * static_cast<std::size_t>(n_coils))
        throw std::invalid_argument("coilsim: matrix storage does not match grid and coils");
    CoilSensitivitySet set;
    set.grid = grid;
    set.maps.assign(n_coils, ComplexImage(grid));
    for (int c = 0; c < n_coils; ++c)
        for (std::size_t v = 0; v < pixels; ++v) set.maps[c].samples[v] = s[v * n_coils + c];
    set.normalized = false;
    return set;
}

// Inter-coil coupling model: project the stacked map matrix onto its leading
// `rank` right singular vectors, leaving a set whose matrix rank is at most
// `rank`.
inline CoilSensitivitySet couple_coils(const CoilSensitivitySet& set, int rank) {
    set.validate();
    if (rank < 1 || rank > set.n_coils())
        throw std::invalid_argument("coilsim: coupling rank must lie in [1, n_coils]");
    std::vector<cdouble> s = pack_sensitivity_matrix(set);
    std::vector<cdouble> projected =
        low_rank_project(s.data(), set.grid.n_pixels(), set.n_coils(), rank);
    return unpack_sensitivity_matrix(projected, set.grid, set.n_coils());
}

// Per-voxel unit-norm scaling inside the support; voxels outside are set to
// zero. A supported voxel where every coil vanishes cannot be normalized.
inline CoilSensitivitySet normalize_maps(const CoilSensitivitySet& set,
                                         const SupportMask& support) {
    set.validate();
    if (support.width != set.grid.width || support.height != set.grid.height)
        throw std::invalid_argument("coilsim: support mask does not match the map grid");
    CoilSensitivitySet out = set;
    std::size_t degenerate = 0;
    int first_x = -1, first_y = -1;
    for (int iy = 0; iy < set.grid.height; ++iy) {
        for (int ix = 0; ix < set.grid.width; ++ix) {
            if (!support.at(ix, iy)) {
                for (auto& m : out.maps) m.at(ix, iy) = 0.0;
                continue;
            }
            double norm2 = 0.0;
            for (const auto& m : set.maps) norm2 += std::norm(m.at(ix, iy));
            if (norm2 == 0.0) {
                if (degenerate++ == 0) {
                    first_x = ix;
                    first_y = iy;
                }
                continue;
            }
            double inv = 1.0 / std::sqrt(norm2);
            for (auto& m : out.maps) m.at(ix, iy) *= inv;
        }
    }
    if (degenerate > 0) {
        std::ostringstream msg;
        msg << degenerate << " supported voxel(s) have zero sensitivity norm, first at ("
            << first_x << ", " << first_y << ")";
        throw DegenerateVoxelError(msg.str());
    }
    out.normalized = true;
    return out;
}

// Zero the maps outside the support without rescaling inside.
inline CoilSensitivitySet mask_maps(const CoilSensitivitySet& set, const SupportMask& support) {
    set.validate();
    if (support.width != set.grid.width || support.height != set.grid.height)
        throw std::invalid_argument("coilsim: support mask does not match the map grid");
    CoilSensitivitySet out = set;
    for (int iy = 0; iy < set.grid.height; ++iy)
        for (int ix = 0; ix < set.grid.width; ++ix)
            if (!support.at(ix, iy))
                for (auto& m : out.maps) m.at(ix, iy) = 0.0;
    return out;
}

inline CoilSensitivitySet conjugate_maps(const CoilSensitivitySet& set) {
    CoilSensitivitySet out = set;
    for (auto& m : out.maps)
        for (auto& z : m.samples) z = std::conj(z);
    return out;
}

}  // namespace xnucsens
