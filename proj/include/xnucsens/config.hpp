#pragma once

#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "estimators.hpp"
#include "pipeline.hpp"

namespace xnucsens {

// Full run description shared by every command: the benchmark pipeline
// settings plus acquisition, estimation and output options. Every field maps
// one-to-one onto a `key = value` line of a config file, and command-line
// flags override file values.
struct RunConfig {
    PipelineConfig pipeline;

    double snr = std::numeric_limits<double>::infinity();
    std::vector<double> snr_list = {std::numeric_limits<double>::infinity(), 50.0, 20.0, 10.0};
    int n_trials = 20;
    std::uint64_t seed = 1;

    // "refpeak", "l2optimal" or "both"
    std::string method = "both";
    IndexSetMode index_set = IndexSetMode::spectral;

    BolusCurve bolus;  // used when n_frames > 1 or metabolites are requested
    int n_metabolites = 1;

    double scale_max = 0.25;  // display scale of exported difference maps
    std::string out_dir = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_config_double(const std::string& key, const std::string& value) {
    std::string v = trim(value);
    if (v == "inf" || v == "Inf" || v == "INF")
        return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' needs a number, got '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config: key '" + key + "' needs a number, got '" + v + "'");
    return out;
}

inline int parse_config_int(const std::string& key, const std::string& value) {
    double d = parse_config_double(key, value);
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw std::invalid_argument("config: key '" + key + "' needs an integer");
    return i;
}

inline std::uint64_t parse_config_u64(const std::string& key, const std::string& value) {
    std::string v = trim(value);
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' needs an unsigned integer");
    }
    if (used != v.size())
        throw std::invalid_argument("config: key '" + key + "' needs an unsigned integer");
    return out;
}

inline bool parse_config_bool(const std::string& key, const std::string& value) {
    std::string v = trim(value);
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw std::invalid_argument("config: key '" + key + "' needs on/off");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char ch : s) {
        if (ch == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current += ch;
        }
    }
    parts.push_back(current);
    return parts;
}

}  // namespace detail

inline IndexSetMode parse_index_set_mode(const std::string& value) {
    std::string v = detail::trim(value);
    if (v == "spectral") return IndexSetMode::spectral;
    if (v == "spectral-time") return IndexSetMode::spectral_time;
    if (v == "metabolite-time") return IndexSetMode::metabolite_time;
    throw std::invalid_argument(
        "config: index_set must be spectral, spectral-time or metabolite-time");
}

inline std::string index_set_mode_name(IndexSetMode mode) {
    switch (mode) {
        case IndexSetMode::spectral: return "spectral";
        case IndexSetMode::spectral_time: return "spectral-time";
        case IndexSetMode::metabolite_time: return "metabolite-time";
        default: return "custom";
    }
}

inline std::string parse_method_name(const std::string& value) {
    std::string v = detail::trim(value);
    if (v == "refpeak" || v == "ref-peak") return "refpeak";
    if (v == "l2" || v == "l2optimal" || v == "l2-optimal") return "l2optimal";
    if (v == "both") return "both";
    throw std::invalid_argument("config: method must be refpeak, l2 or both");
}

// Spectrum lines encode as "center:amplitude:fwhm[:phase]" separated by
// semicolons, e.g. "20:4:6;44:1:6".
inline std::vector<SpectralLine> parse_spectrum_lines(const std::string& value) {
    std::vector<SpectralLine> lines;
    for (const std::string& part : detail::split(value, ';')) {
        std::string p = detail::trim(part);
        if (p.empty()) continue;
        std::vector<std::string> fields = detail::split(p, ':');
        if (fields.size() != 3 && fields.size() != 4)
            throw std::invalid_argument(
                "config: spectrum_lines entries need center:amplitude:fwhm[:phase]");
        SpectralLine line;
        line.center_bin = detail::parse_config_double("spectrum_lines", fields[0]);
        line.amplitude = detail::parse_config_double("spectrum_lines", fields[1]);
        line.fwhm_bins = detail::parse_config_double("spectrum_lines", fields[2]);
        line.phase_rad =
            fields.size() == 4 ? detail::parse_config_double("spectrum_lines", fields[3]) : 0.0;
        lines.push_back(line);
    }
    if (lines.empty())
        throw std::invalid_argument("config: spectrum_lines must contain at least one line");
    return lines;
}

inline std::string spectrum_lines_text(const std::vector<SpectralLine>& lines) {
    std::string out;
    char buf[160];
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.10g:%.10g:%.10g:%.10g", lines[i].center_bin,
                      lines[i].amplitude, lines[i].fwhm_bins, lines[i].phase_rad);
        if (i) out += ';';
        out += buf;
    }
    return out;
}

inline std::vector<double> parse_snr_list(const std::string& value) {
    std::vector<double> list;
    for (const std::string& part : detail::split(value, ',')) {
        std::string p = detail::trim(part);
        if (p.empty()) continue;
        list.push_back(detail::parse_config_double("snr_list", p));
    }
    if (list.empty()) throw std::invalid_argument("config: snr_list must not be empty");
    return list;
}

// Apply one `key = value` assignment; unknown keys are an error so typos
// cannot silently fall back to defaults.
inline void apply_config_entry(RunConfig& config, const std::string& key,
                               const std::string& value) {
    using detail::parse_config_bool;
    using detail::parse_config_double;
    using detail::parse_config_int;
    using detail::parse_config_u64;

    if (key == "phantom_width") config.pipeline.phantom_width = parse_config_int(key, value);
    else if (key == "phantom_height") config.pipeline.phantom_height = parse_config_int(key, value);
    else if (key == "fov_m") config.pipeline.fov_m = parse_config_double(key, value);
    else if (key == "n_bins") config.pipeline.spectrum.n_bins = parse_config_int(key, value);
    else if (key == "spectrum_lines") config.pipeline.spectrum.lines = parse_spectrum_lines(value);
    else if (key == "n_coils") config.pipeline.n_coils = parse_config_int(key, value);
    else if (key == "opposite_distance_m")
        config.pipeline.opposite_distance_m = parse_config_double(key, value);
    else if (key == "coil_width_m") config.pipeline.coil_width_m = parse_config_double(key, value);
    else if (key == "coil_height_m")
        config.pipeline.coil_height_m = parse_config_double(key, value);
    else if (key == "plane_offset_m")
        config.pipeline.plane_offset_m = parse_config_double(key, value);
    else if (key == "coupling_rank") config.pipeline.coupling_rank = parse_config_int(key, value);
    else if (key == "support_threshold")
        config.pipeline.estimator.support_threshold = parse_config_double(key, value);
    else if (key == "refpeak_bin_mode") {
        std::string v = detail::trim(value);
        if (v == "shared-peak")
            config.pipeline.estimator.refpeak_bin_mode = RefPeakBinMode::shared_peak;
        else if (v == "per-coil-max")
            config.pipeline.estimator.refpeak_bin_mode = RefPeakBinMode::per_coil_max;
        else
            throw std::invalid_argument(
                "config: refpeak_bin_mode must be shared-peak or per-coil-max");
    } else if (key == "rss_regressor_mode") {
        std::string v = detail::trim(value);
        if (v == "magnitude-squared")
            config.pipeline.estimator.rss_regressor_mode = RssRegressorMode::magnitude_squared;
        else if (v == "literal-square")
            config.pipeline.estimator.rss_regressor_mode = RssRegressorMode::literal_square;
        else
            throw std::invalid_argument(
                "config: rss_regressor_mode must be magnitude-squared or literal-square");
    } else if (key == "phase_align") config.pipeline.phase_align = parse_config_bool(key, value);
    else if (key == "snr") config.snr = parse_config_double(key, value);
    else if (key == "snr_list") config.snr_list = parse_snr_list(value);
    else if (key == "n_trials") config.n_trials = parse_config_int(key, value);
    else if (key == "seed") config.seed = parse_config_u64(key, value);
    else if (key == "method") config.method = parse_method_name(value);
    else if (key == "index_set") config.index_set = parse_index_set_mode(value);
    else if (key == "n_frames") config.bolus.n_frames = parse_config_int(key, value);
    else if (key == "frame_spacing_s")
        config.bolus.frame_spacing_s = parse_config_double(key, value);
    else if (key == "bolus_arrival_s") config.bolus.arrival_s = parse_config_double(key, value);
    else if (key == "bolus_shape") config.bolus.shape = parse_config_double(key, value);
    else if (key == "bolus_rate_s") config.bolus.rate_s = parse_config_double(key, value);
    else if (key == "bolus_peak") config.bolus.peak_amplitude = parse_config_double(key, value);
    else if (key == "n_metabolites") config.n_metabolites = parse_config_int(key, value);
    else if (key == "scale_max") config.scale_max = parse_config_double(key, value);
    else if (key == "out_dir") config.out_dir = detail::trim(value);
    else
        throw std::invalid_argument("config: unknown key '" + key + "'");
}

// Parse `key = value` text: one assignment per line, '#' starts a comment,
// blank lines are skipped.
inline RunConfig parse_run_config(const std::string& text, RunConfig config = {}) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::string body = detail::trim(line);
        if (body.empty()) continue;
        std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " is not a key = value assignment");
        std::string key = detail::trim(body.substr(0, eq));
        std::string value = detail::trim(body.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " has an empty key");
        apply_config_entry(config, key, value);
    }
    return config;
}

// Canonical echo of a full configuration; parsing it back reproduces the
// same configuration, and run.meta files are built from it.
inline std::string run_config_text(const RunConfig& config) {
    std::ostringstream out;
    auto num = [](double v) {
        if (std::isinf(v)) return std::string("inf");
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        return std::string(buf);
    };
    out << "phantom_width = " << config.pipeline.phantom_width << '\n';
    out << "phantom_height = " << config.pipeline.phantom_height << '\n';
    out << "fov_m = " << num(config.pipeline.fov_m) << '\n';
    out << "n_bins = " << config.pipeline.spectrum.n_bins << '\n';
    out << "spectrum_lines = " << spectrum_lines_text(config.pipeline.spectrum.lines) << '\n';
    out << "n_coils = " << config.pipeline.n_coils << '\n';
    out << "opposite_distance_m = " << num(config.pipeline.opposite_distance_m) << '\n';
    out << "coil_width_m = " << num(config.pipeline.coil_width_m) << '\n';
    out << "coil_height_m = " << num(config.pipeline.coil_height_m) << '\n';
    out << "plane_offset_m = " << num(config.pipeline.plane_offset_m) << '\n';
    out << "coupling_rank = " << config.pipeline.coupling_rank << '\n';
    out << "support_threshold = " << num(config.pipeline.estimator.support_threshold) << '\n';
    out << "refpeak_bin_mode = "
        << (config.pipeline.estimator.refpeak_bin_mode == RefPeakBinMode::shared_peak
                ? "shared-peak"
                : "per-coil-max")
        << '\n';
    out << "rss_regressor_mode = "
        << (config.pipeline.estimator.rss_regressor_mode == RssRegressorMode::magnitude_squared
                ? "magnitude-squared"
                : "literal-square")
        << '\n';
    out << "phase_align = " << (config.pipeline.phase_align ? "on" : "off") << '\n';
    out << "snr = " << num(config.snr) << '\n';
    out << "snr_list = ";
    for (std::size_t i = 0; i < config.snr_list.size(); ++i)
        out << (i ? "," : "") << num(config.snr_list[i]);
    out << '\n';
    out << "n_trials = " << config.n_trials << '\n';
    out << "seed = " << config.seed << '\n';
    out << "method = " << config.method << '\n';
    out << "index_set = " << index_set_mode_name(config.index_set) << '\n';
    out << "n_frames = " << config.bolus.n_frames << '\n';
    out << "frame_spacing_s = " << num(config.bolus.frame_spacing_s) << '\n';
    out << "bolus_arrival_s = " << num(config.bolus.arrival_s) << '\n';
    out << "bolus_shape = " << num(config.bolus.shape) << '\n';
    out << "bolus_rate_s = " << num(config.bolus.rate_s) << '\n';
    out << "bolus_peak = " << num(config.bolus.peak_amplitude) << '\n';
    out << "n_metabolites = " << config.n_metabolites << '\n';
    out << "scale_max = " << num(config.scale_max) << '\n';
    out << "out_dir = " << config.out_dir << '\n';
    return out.str();
}

}  // namespace xnucsens
