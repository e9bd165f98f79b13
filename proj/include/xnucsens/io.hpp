#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "acquisition.hpp"
#include "core.hpp"

namespace xnucsens {

// Binary container for complex multi-coil spectral datasets.
//
//   offset  size  content
//   0       8     magic "XNUCSEN1"
//   8       24    six little-endian u32 dims: coils, bins, frames,
//                 metabolites, height, width
//   32      1     domain tag: 0 = k-space, 1 = image
//   33      8     little-endian f64 pixel size (meters)
//   41      -     interleaved little-endian f64 (re, im) pairs in
//                 (coil, bin, frame, metabolite, y, x) order, y and x
//                 row-major
inline constexpr char container_magic[8] = {'X', 'N', 'U', 'C', 'S', 'E', 'N', '1'};
inline constexpr std::size_t container_header_size = 41;

namespace detail {

inline void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64_le(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

inline std::uint32_t get_u32_le(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

inline double get_f64_le(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_dataset(const MultiCoilSpectralDataset& data) {
    data.validate_dims();
    std::vector<std::uint8_t> out;
    out.reserve(container_header_size + data.samples.size() * 16);
    for (char c : container_magic) out.push_back(static_cast<std::uint8_t>(c));
    for (int dim : {data.n_coils, data.n_bins, data.n_frames, data.n_metabolites,
                    data.grid.height, data.grid.width})
        detail::put_u32_le(out, static_cast<std::uint32_t>(dim));
    out.push_back(data.domain == Domain::kspace ? 0 : 1);
    detail::put_f64_le(out, data.grid.pixel_size);
    for (const cdouble& z : data.samples) {
        detail::put_f64_le(out, z.real());
        detail::put_f64_le(out, z.imag());
    }
    return out;
}

inline MultiCoilSpectralDataset deserialize_dataset(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < container_header_size)
        throw FormatError("truncated header", bytes.size());
    for (int i = 0; i < 8; ++i)
        if (bytes[i] != static_cast<std::uint8_t>(container_magic[i]))
            throw FormatError("bad magic", 0);

    std::uint32_t dims[6];
    std::uint64_t total = 1;
    for (int i = 0; i < 6; ++i) {
        dims[i] = detail::get_u32_le(bytes.data() + 8 + 4 * i);
        if (dims[i] == 0) throw FormatError("zero dimension", 8 + 4 * static_cast<std::size_t>(i));
        total *= dims[i];
        if (total > static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()))
            throw FormatError("dimension overflow", 8);
    }

    std::uint8_t tag = bytes[32];
    if (tag > 1) throw FormatError("unknown domain tag", 32);
    double pixel_size = detail::get_f64_le(bytes.data() + 33);
    if (!std::isfinite(pixel_size) || !(pixel_size > 0.0))
        throw FormatError("pixel size must be finite and positive", 33);

    std::size_t expect = container_header_size + static_cast<std::size_t>(total) * 16;
    if (bytes.size() < expect) throw FormatError("truncated payload", bytes.size());
    if (bytes.size() > expect) throw FormatError("unexpected trailing bytes", expect);

    GridSpec grid;
    grid.height = static_cast<int>(dims[4]);
    grid.width = static_cast<int>(dims[5]);
    grid.pixel_size = pixel_size;
    MultiCoilSpectralDataset data(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                                  static_cast<int>(dims[2]), static_cast<int>(dims[3]), grid,
                                  tag == 0 ? Domain::kspace : Domain::image);
    const std::uint8_t* p = bytes.data() + container_header_size;
    for (std::size_t i = 0; i < data.samples.size(); ++i, p += 16)
        data.samples[i] = cdouble(detail::get_f64_le(p), detail::get_f64_le(p + 8));
    return data;
}

inline void write_binary_file(const std::filesystem::path& path,
                              const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("io: cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("io: write to " + path.string() + " failed");
}

inline std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("io: cannot open " + path.string());
    std::streamsize size = in.tellg();
    in.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), size);
    if (!in) throw std::runtime_error("io: read from " + path.string() + " failed");
    return bytes;
}

inline void save_dataset(const std::filesystem::path& path,
                         const MultiCoilSpectralDataset& data) {
    write_binary_file(path, serialize_dataset(data));
}

inline MultiCoilSpectralDataset load_dataset(const std::filesystem::path& path) {
    return deserialize_dataset(read_binary_file(path));
}

// Maps serialize as an image-domain dataset with one bin, frame and
// metabolite per coil map.
inline MultiCoilSpectralDataset maps_as_dataset(const CoilSensitivitySet& maps) {
    maps.validate();
    MultiCoilSpectralDataset data(maps.n_coils(), 1, 1, 1, maps.grid, Domain::image);
    std::size_t pixels = maps.grid.n_pixels();
    for (int c = 0; c < maps.n_coils(); ++c)
        std::copy(maps.maps[c].samples.begin(), maps.maps[c].samples.end(),
                  data.samples.begin() + static_cast<std::size_t>(c) * pixels);
    return data;
}

inline CoilSensitivitySet maps_from_dataset(const MultiCoilSpectralDataset& data) {
    if (data.n_bins != 1 || data.n_frames != 1 || data.n_metabolites != 1)
        throw std::invalid_argument("io: a map container must have singleton spectral axes");
    CoilSensitivitySet maps;
    maps.grid = data.grid;
    maps.maps.assign(data.n_coils, ComplexImage(data.grid));
    std::size_t pixels = data.grid.n_pixels();
    for (int c = 0; c < data.n_coils; ++c) {
        const cdouble* s = data.slice(c, 0, 0, 0);
        std::copy(s, s + pixels, maps.maps[c].samples.begin());
    }
    return maps;
}

// 16-bit binary PGM (P5, maxval 65535, big-endian samples per the format).
// Values are clamped to [0, scale_max] and mapped linearly onto the full
// sample range; the caller records scale_max alongside the image.
inline void write_pgm16(const std::filesystem::path& path, int width, int height,
                        const std::vector<double>& values, double scale_max) {
    if (width < 1 || height < 1 ||
        values.size() != static_cast<std::size_t>(width) * height)
        throw std::invalid_argument("io: pgm dimensions do not match the sample count");
    if (!(scale_max > 0.0)) throw std::invalid_argument("io: pgm scale must be positive");
    std::vector<std::uint8_t> bytes;
    std::string header =
        "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
    bytes.insert(bytes.end(), header.begin(), header.end());
    for (double v : values) {
        double unit = v / scale_max;
        unit = unit < 0.0 ? 0.0 : (unit > 1.0 ? 1.0 : unit);
        auto q = static_cast<std::uint16_t>(std::lround(unit * 65535.0));
        bytes.push_back(static_cast<std::uint8_t>(q >> 8));
        bytes.push_back(static_cast<std::uint8_t>(q & 0xFF));
    }
    write_binary_file(path, bytes);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("io: cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("io: write to " + path.string() + " failed");
}

// Canonical number formatting for CSV output: finite values in scientific
// notation with nine significant decimals, infinities as "inf".
inline std::string format_csv_value(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9e", v);
    return buf;
}

// Per-coil magnitude images of a map set, on a shared linear scale, plus a
// sidecar CSV recording that scale and a raw container with the full
// complex values.
inline void export_map_set(const std::filesystem::path& dir, const std::string& prefix,
                           const CoilSensitivitySet& maps) {
    maps.validate();
    std::filesystem::create_directories(dir);
    double scale = 0.0;
    for (const ComplexImage& m : maps.maps)
        for (const cdouble& z : m.samples) scale = std::max(scale, std::abs(z));
    if (scale == 0.0) scale = 1.0;
    std::vector<double> mag(maps.grid.n_pixels());
    for (int c = 0; c < maps.n_coils(); ++c) {
        for (std::size_t v = 0; v < mag.size(); ++v) mag[v] = std::abs(maps.maps[c].samples[v]);
        write_pgm16(dir / (prefix + "_coil" + std::to_string(c) + ".pgm"), maps.grid.width,
                    maps.grid.height, mag, scale);
    }
    write_text_file(dir / (prefix + "_scale.csv"),
                    "quantity,value\nscale_max," + format_csv_value(scale) + "\n");
    save_dataset(dir / (prefix + ".xns"), maps_as_dataset(maps));
}

// Per-coil |est - truth| images on a fixed scale, for side-by-side error
// comparison across methods and noise levels.
inline void export_difference_maps(const std::filesystem::path& dir, const std::string& prefix,
                                   const CoilSensitivitySet& est, const CoilSensitivitySet& truth,
                                   double scale_max) {
    est.validate();
    truth.validate();
    if (est.n_coils() != truth.n_coils() || !same_grid(est.grid, truth.grid))
        throw std::invalid_argument("io: difference maps need matching map sets");
    std::filesystem::create_directories(dir);
    std::vector<double> mag(est.grid.n_pixels());
    for (int c = 0; c < est.n_coils(); ++c) {
        for (std::size_t v = 0; v < mag.size(); ++v)
            mag[v] = std::abs(est.maps[c].samples[v] - truth.maps[c].samples[v]);
        write_pgm16(dir / (prefix + "_coil" + std::to_string(c) + ".pgm"), est.grid.width,
                    est.grid.height, mag, scale_max);
    }
    write_text_file(dir / (prefix + "_scale.csv"),
                    "quantity,value\nscale_max," + format_csv_value(scale_max) + "\n");
}

}  // namespace xnucsens
