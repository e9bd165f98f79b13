// xnucsens — command line front end for the coil sensitivity benchmark.
//
// One static binary with subcommands; every subcommand is a pure function of
// (config file, flags, input files, seed). Outputs carry a run.meta sidecar
// with the effective configuration so any result can be regenerated, and no
// output embeds wall-clock state, so reruns are byte-identical.

#include "CLI11.hpp"

#include <xnucsens/xnucsens.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace xnucsens;

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  2  usage error (unknown flag, subcommand or malformed argument)\n"
    "  3  configuration error (unknown key, invalid value, inconsistent request)\n"
    "  4  container format error (malformed .xns input)\n"
    "  5  invalid operation (incompatible inputs, degenerate geometry or data)\n"
    "  6  file I/O error (missing input, unwritable output)\n"
    "Errors print a single line to stderr: `error: <category>: <detail>`.";

// ---------------------------------------------------------------------------
// Flag plumbing. Every tuning flag maps onto a config-file key and is parsed
// by the same code path, so `--snr inf` and a `snr = inf` line behave
// identically; flags override file entries.

struct KeyOverride {
    std::string key;
    std::string value;
};

struct CommonArgs {
    std::string config_path;
    std::vector<KeyOverride> overrides;
};

void add_key_flag(CLI::App* cmd, CommonArgs& args, const std::string& flag,
                  const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
           flag,
           [&args, key](const std::string& value) {
               args.overrides.push_back({key, value});
           },
           help + " (config key: " + key + ")")
        ->type_name("VALUE");
}

void add_common_flags(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path,
                    "Configuration file (key = value lines, '#' comments)")
        ->type_name("FILE");
    cmd->add_option_function<std::vector<std::string>>(
           "--set",
           [&args](const std::vector<std::string>& entries) {
               for (const std::string& e : entries) {
                   std::size_t eq = e.find('=');
                   if (eq == std::string::npos)
                       throw CLI::ValidationError("--set", "expected KEY=VALUE, got '" + e + "'");
                   args.overrides.push_back({e.substr(0, eq), e.substr(eq + 1)});
               }
           },
           "Set any config key (KEY=VALUE, repeatable)")
        ->type_name("KEY=VALUE");
    add_key_flag(cmd, args, "--out", "out_dir", "Output directory");
    add_key_flag(cmd, args, "--seed", "seed", "Master seed for noise streams");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes = read_binary_file(path);
    return std::string(bytes.begin(), bytes.end());
}

// Resolve the effective configuration: subcommand defaults, then the config
// file, then flags, in increasing precedence.
RunConfig resolve_config(const CommonArgs& args, RunConfig base) {
    RunConfig config = std::move(base);
    if (!args.config_path.empty())
        config = parse_run_config(read_text_file(args.config_path), config);
    for (const KeyOverride& o : args.overrides) apply_config_entry(config, o.key, o.value);
    return config;
}

void write_run_meta(const RunConfig& config, const std::string& command) {
    std::filesystem::create_directories(config.out_dir);
    std::string meta = "# xnucsens ";
    meta += version;
    meta += " run metadata\n# command: " + command + "\n" + run_config_text(config);
    write_text_file(std::filesystem::path(config.out_dir) / "run.meta", meta);
}

// ---------------------------------------------------------------------------
// Shared helpers.

std::vector<std::vector<cdouble>> metabolite_spectra(const SpectrumModel& base, int n_metabolites) {
    if (n_metabolites < 1)
        throw std::invalid_argument("config: n_metabolites must be at least 1");
    std::vector<std::vector<cdouble>> spectra;
    spectra.reserve(n_metabolites);
    for (int m = 0; m < n_metabolites; ++m) {
        SpectrumModel model = base;
        double shift = static_cast<double>(m) * base.n_bins / n_metabolites;
        for (SpectralLine& line : model.lines)
            line.center_bin = std::fmod(line.center_bin + shift, static_cast<double>(base.n_bins));
        spectra.push_back(synthesize_spectrum(model));
    }
    return spectra;
}

MultiCoilSpectralDataset to_image_domain(const MultiCoilSpectralDataset& data) {
    return data.domain == Domain::kspace ? inverse_recon(data) : data;
}

IndexSet index_set_for(const RunConfig& config, const MultiCoilSpectralDataset& data) {
    switch (config.index_set) {
        case IndexSetMode::spectral: return make_spectral_set(data.n_bins);
        case IndexSetMode::spectral_time: return make_spectral_time_set(data.n_bins, data.n_frames);
        case IndexSetMode::metabolite_time:
            return make_metabolite_time_set(data.n_metabolites, data.n_frames);
        default: throw std::invalid_argument("config: unsupported index_set mode");
    }
}

SupportMask nonzero_support(const CoilSensitivitySet& maps) {
    SupportMask mask(maps.grid.width, maps.grid.height);
    for (std::size_t v = 0; v < maps.grid.n_pixels(); ++v) {
        bool any = false;
        for (const ComplexImage& m : maps.maps) any = any || m.samples[v] != cdouble(0.0, 0.0);
        mask.inside[v] = any ? 1 : 0;
    }
    return mask;
}

void export_combined(const std::filesystem::path& dir, const std::string& prefix,
                     const CombinedImage& combined) {
    std::filesystem::create_directories(dir);
    std::vector<double> mag(combined.image.grid.n_pixels());
    double scale = 0.0;
    for (std::size_t v = 0; v < mag.size(); ++v) {
        mag[v] = std::abs(combined.image.samples[v]);
        scale = std::max(scale, mag[v]);
    }
    if (scale == 0.0) scale = 1.0;
    write_pgm16(dir / (prefix + ".pgm"), combined.image.grid.width, combined.image.grid.height,
                mag, scale);
    write_text_file(dir / (prefix + "_scale.csv"),
                    "quantity,value\nscale_max," + format_csv_value(scale) + "\n");
    MultiCoilSpectralDataset container(1, 1, 1, 1, combined.image.grid, Domain::image);
    container.samples = combined.image.samples;
    save_dataset(dir / (prefix + ".xns"), container);
}

bool wants_refpeak(const RunConfig& c) { return c.method == "both" || c.method == "refpeak"; }
bool wants_l2(const RunConfig& c) { return c.method == "both" || c.method == "l2optimal"; }

// ---------------------------------------------------------------------------
// Subcommands.

int cmd_phantom(const RunConfig& config) {
    RealImage phantom =
        generate_shepp_logan(config.pipeline.phantom_width, config.pipeline.phantom_height);
    phantom.grid.pixel_size = config.pipeline.fov_m / config.pipeline.phantom_width;

    std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    double scale = 0.0;
    for (double v : phantom.samples) scale = std::max(scale, v);
    if (scale == 0.0) scale = 1.0;
    write_pgm16(dir / "phantom.pgm", phantom.grid.width, phantom.grid.height, phantom.samples,
                scale);
    write_text_file(dir / "phantom_scale.csv",
                    "quantity,value\nscale_max," + format_csv_value(scale) + "\n");

    MultiCoilSpectralDataset container(1, 1, 1, 1, phantom.grid, Domain::image);
    for (std::size_t v = 0; v < phantom.samples.size(); ++v)
        container.samples[v] = cdouble(phantom.samples[v], 0.0);
    save_dataset(dir / "phantom.xns", container);
    write_run_meta(config, "phantom");
    std::cout << "phantom: " << phantom.grid.width << "x" << phantom.grid.height
              << " written to " << dir.string() << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& config) {
    PipelineTruth truth = build_pipeline_truth(config.pipeline);

    MultiCoilSpectralDataset kspace =
        (config.bolus.n_frames == 1 && config.n_metabolites == 1)
            ? truth.kspace
            : simulate_dynamic(truth.phantom, truth.maps,
                               metabolite_spectra(config.pipeline.spectrum, config.n_metabolites),
                               config.bolus);
    NoiseSpec noise;
    noise.snr = config.snr;
    noise.seed = config.seed;
    MultiCoilSpectralDataset dataset = add_noise(kspace, noise);

    std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    save_dataset(dir / "dataset.xns", dataset);
    export_map_set(dir, "truth_maps", truth.maps);
    write_run_meta(config, "simulate");
    std::cout << "simulate: " << dataset.n_coils << " coils, " << dataset.n_bins << " bins, "
              << dataset.n_frames << " frames, " << dataset.n_metabolites
              << " metabolites, snr " << format_snr_value(config.snr) << ", written to "
              << dir.string() << "\n";
    return 0;
}

int cmd_estimate(const RunConfig& config, const std::string& input) {
    MultiCoilSpectralDataset image = to_image_domain(load_dataset(input));
    IndexSet index_set = index_set_for(config, image);

    std::filesystem::path dir(config.out_dir);
    if (wants_refpeak(config))
        export_map_set(dir, "maps_refpeak",
                       estimate_maps(image, EstimationMethod::ref_peak, index_set,
                                     config.pipeline.estimator));
    if (wants_l2(config))
        export_map_set(dir, "maps_l2optimal",
                       estimate_maps(image, EstimationMethod::l2_optimal, index_set,
                                     config.pipeline.estimator));
    write_run_meta(config, "estimate");
    std::cout << "estimate: method " << config.method << ", index set "
              << index_set_mode_name(config.index_set) << " (" << index_set.entries.size()
              << " rows), written to " << dir.string() << "\n";
    return 0;
}

int cmd_combine(const RunConfig& config, const std::string& input, const std::string& maps_path,
                const std::string& combine_method, int bin, int frame, int metabolite) {
    MultiCoilSpectralDataset image = to_image_domain(load_dataset(input));
    bool do_roemer = combine_method == "both" || combine_method == "roemer";
    bool do_rss = combine_method == "both" || combine_method == "rss";
    if (!do_roemer && !do_rss)
        throw std::invalid_argument("config: combine method must be roemer, rss or both");
    if (do_roemer && maps_path.empty())
        throw std::invalid_argument("config: the roemer combination needs --maps");

    int p = bin >= 0 ? bin : dominant_bin_of(image);
    if (p >= image.n_bins || frame < 0 || frame >= image.n_frames || metabolite < 0 ||
        metabolite >= image.n_metabolites)
        throw std::invalid_argument("config: combine slice indices out of range");

    std::vector<ComplexImage> coil_images(image.n_coils, ComplexImage(image.grid));
    for (int c = 0; c < image.n_coils; ++c) {
        const cdouble* s = image.slice(c, p, frame, metabolite);
        std::copy(s, s + image.grid.n_pixels(), coil_images[c].samples.begin());
    }

    std::filesystem::path dir(config.out_dir);
    if (do_roemer) {
        CoilSensitivitySet maps = maps_from_dataset(load_dataset(maps_path));
        export_combined(dir, "combined_roemer", roemer_combine(coil_images, maps));
    }
    if (do_rss) export_combined(dir, "combined_rss", rss_combine(coil_images));
    write_run_meta(config, "combine");
    std::cout << "combine: method " << combine_method << ", bin " << p << ", frame " << frame
              << ", metabolite " << metabolite << ", written to " << dir.string() << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& config, const std::string& est_path,
                 const std::string& truth_path) {
    CoilSensitivitySet est = maps_from_dataset(load_dataset(est_path));
    CoilSensitivitySet truth = maps_from_dataset(load_dataset(truth_path));
    SupportMask support = nonzero_support(truth);

    MseReport direct = map_mse(est, truth, support, config.pipeline.phase_align);
    MseReport conjugate =
        map_mse(est, conjugate_maps(truth), support, config.pipeline.phase_align);

    std::string csv = "metric,value\n";
    csv += "n_voxels," + std::to_string(direct.n_voxels) + "\n";
    csv += "mse_aggregate," + format_csv_value(direct.aggregate) + "\n";
    for (std::size_t c = 0; c < direct.per_coil.size(); ++c)
        csv += "mse_coil" + std::to_string(c) + "," + format_csv_value(direct.per_coil[c]) + "\n";
    csv += "mse_conjugate_aggregate," + format_csv_value(conjugate.aggregate) + "\n";

    std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    write_text_file(dir / "evaluation.csv", csv);
    write_run_meta(config, "evaluate");
    std::cout << "evaluate: mse " << format_csv_value(direct.aggregate) << " over "
              << direct.n_voxels << " voxels (conjugate convention "
              << format_csv_value(conjugate.aggregate) << "), written to " << dir.string()
              << "\n";
    return 0;
}

int cmd_reproduce_table1(const RunConfig& config) {
    Table1 table =
        reproduce_table1(config.pipeline, config.snr_list, config.n_trials, config.seed);
    Table1 selected;
    for (const Table1Row& row : table.rows)
        if ((row.method == "refpeak" && wants_refpeak(config)) ||
            (row.method == "l2optimal" && wants_l2(config)))
            selected.rows.push_back(row);

    std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    write_text_file(dir / "table1.csv", table1_csv(selected));

    // Difference maps from the first trial of every SNR row, on one shared
    // display scale, as the visual counterpart of the table.
    PipelineTruth truth = build_pipeline_truth(config.pipeline);
    IndexSet index_set = make_spectral_set(truth.kspace.n_bins);
    for (std::size_t i = 0; i < config.snr_list.size(); ++i) {
        double snr = config.snr_list[i];
        double sigma = std::isinf(snr) ? 0.0 : truth.peak_signal / snr;
        TrialResult trial = run_pipeline_trial(truth, config.pipeline, index_set, sigma,
                                               trial_seed(config.seed, i, 0));
        std::string label = "diff_snr" + format_snr_value(snr);
        if (wants_refpeak(config))
            export_difference_maps(dir, label + "_refpeak", trial.est_refpeak, truth.conj_maps,
                                   config.scale_max);
        if (wants_l2(config))
            export_difference_maps(dir, label + "_l2optimal", trial.est_l2, truth.maps,
                                   config.scale_max);
    }
    write_run_meta(config, "reproduce-table1");

    std::cout << "snr,method,mse_mean,mse_std,n_trials,seed\n";
    for (const Table1Row& row : selected.rows)
        std::cout << format_snr_value(row.snr) << ',' << row.method << ','
                  << format_csv_value(row.mse_mean) << ',' << format_csv_value(row.mse_std) << ','
                  << row.n_trials << ',' << row.seed << "\n";
    std::cout << "reproduce-table1: written to " << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// Error classification: one line on stderr, distinct exit codes (see
// kExitCodeHelp).

int classify_and_report(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const FormatError*>(&e)) return 4;
    if (dynamic_cast<const SingularGeometryError*>(&e) ||
        dynamic_cast<const DegenerateVoxelError*>(&e))
        return 5;
    if (dynamic_cast<const std::invalid_argument*>(&e)) {
        std::string msg = e.what();
        return msg.rfind("config:", 0) == 0 ? 3 : 5;
    }
    return 6;  // runtime_error from file I/O, filesystem_error, bad_alloc...
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("xnucsens ") + version +
                 " — coil sensitivity estimation benchmark for X-nuclei MR spectroscopic "
                 "imaging"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("xnucsens ") + version);
    app.footer(kExitCodeHelp);

    CommonArgs phantom_args;
    CLI::App* phantom_cmd =
        app.add_subcommand("phantom", "Rasterize the Shepp-Logan phantom and export it");
    add_common_flags(phantom_cmd, phantom_args);
    add_key_flag(phantom_cmd, phantom_args, "--width", "phantom_width", "Raster width in pixels");
    add_key_flag(phantom_cmd, phantom_args, "--height", "phantom_height",
                 "Raster height in pixels");
    add_key_flag(phantom_cmd, phantom_args, "--fov-m", "fov_m", "Field of view in meters");

    CommonArgs simulate_args;
    CLI::App* simulate_cmd = app.add_subcommand(
        "simulate",
        "Simulate a multi-coil spectral acquisition (dataset.xns k-space container plus the "
        "ground-truth maps). With n_frames > 1 or n_metabolites > 1 the acquisition is dynamic: "
        "frames follow the gamma-variate bolus and metabolite spectra are cyclic shifts of the "
        "configured line set");
    add_common_flags(simulate_cmd, simulate_args);
    add_key_flag(simulate_cmd, simulate_args, "--snr", "snr",
                 "Peak-signal-to-noise-sigma ratio; inf for noiseless");
    add_key_flag(simulate_cmd, simulate_args, "--n-frames", "n_frames", "Time frames");
    add_key_flag(simulate_cmd, simulate_args, "--n-metabolites", "n_metabolites",
                 "Metabolite channels");

    CommonArgs estimate_args;
    std::string estimate_input;
    CLI::App* estimate_cmd = app.add_subcommand(
        "estimate", "Estimate sensitivity maps from a dataset container (k-space inputs are "
                    "reconstructed first)");
    add_common_flags(estimate_cmd, estimate_args);
    estimate_cmd->add_option("--input", estimate_input, "Dataset container (.xns)")
        ->type_name("FILE")
        ->required();
    add_key_flag(estimate_cmd, estimate_args, "--method", "method",
                 "Estimator: refpeak, l2 or both");
    add_key_flag(estimate_cmd, estimate_args, "--index-set", "index_set",
                 "Row stacking: spectral, spectral-time or metabolite-time");
    add_key_flag(estimate_cmd, estimate_args, "--support-threshold", "support_threshold",
                 "Vacant-voxel energy fraction (default 0.05 for this subcommand)");

    CommonArgs combine_args;
    std::string combine_input, combine_maps, combine_method = "both";
    int combine_bin = -1, combine_frame = 0, combine_metabolite = 0;
    CLI::App* combine_cmd = app.add_subcommand(
        "combine", "Combine one dataset slice across coils (matched-filter and/or "
                   "root-sum-of-squares)");
    add_common_flags(combine_cmd, combine_args);
    combine_cmd->add_option("--input", combine_input, "Dataset container (.xns)")
        ->type_name("FILE")
        ->required();
    combine_cmd->add_option("--maps", combine_maps,
                            "Sensitivity map container (.xns); required for roemer")
        ->type_name("FILE");
    combine_cmd->add_option("--combine-method", combine_method, "roemer, rss or both")
        ->type_name("NAME");
    combine_cmd->add_option("--bin", combine_bin,
                            "Spectral bin to combine (default: dominant bin)");
    combine_cmd->add_option("--frame", combine_frame, "Time frame to combine");
    combine_cmd->add_option("--metabolite", combine_metabolite, "Metabolite channel to combine");

    CommonArgs evaluate_args;
    std::string evaluate_est, evaluate_truth;
    CLI::App* evaluate_cmd = app.add_subcommand(
        "evaluate", "Score estimated maps against reference maps over the reference support "
                    "(evaluation.csv)");
    add_common_flags(evaluate_cmd, evaluate_args);
    evaluate_cmd->add_option("--est", evaluate_est, "Estimated map container (.xns)")
        ->type_name("FILE")
        ->required();
    evaluate_cmd->add_option("--truth", evaluate_truth, "Reference map container (.xns)")
        ->type_name("FILE")
        ->required();
    add_key_flag(evaluate_cmd, evaluate_args, "--phase-align", "phase_align",
                 "Remove one global phase per voxel before scoring (on/off)");

    CommonArgs table_args;
    CLI::App* table_cmd = app.add_subcommand(
        "reproduce-table1",
        "Monte Carlo map-MSE benchmark across SNR values (table1.csv plus difference maps)");
    add_common_flags(table_cmd, table_args);
    add_key_flag(table_cmd, table_args, "--trials", "n_trials", "Monte Carlo trials per SNR");
    add_key_flag(table_cmd, table_args, "--snr-list", "snr_list",
                 "Comma-separated SNR values (inf allowed)");
    add_key_flag(table_cmd, table_args, "--method", "method",
                 "Row selection: refpeak, l2 or both");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    }

    try {
        if (phantom_cmd->parsed()) return cmd_phantom(resolve_config(phantom_args, {}));
        if (simulate_cmd->parsed()) return cmd_simulate(resolve_config(simulate_args, {}));
        if (estimate_cmd->parsed()) {
            RunConfig base;
            base.pipeline.estimator.support_threshold = 0.05;
            return cmd_estimate(resolve_config(estimate_args, base), estimate_input);
        }
        if (combine_cmd->parsed())
            return cmd_combine(resolve_config(combine_args, {}), combine_input, combine_maps,
                               combine_method, combine_bin, combine_frame, combine_metabolite);
        if (evaluate_cmd->parsed())
            return cmd_evaluate(resolve_config(evaluate_args, {}), evaluate_est, evaluate_truth);
        if (table_cmd->parsed()) return cmd_reproduce_table1(resolve_config(table_args, {}));
    } catch (const std::exception& e) {
        return classify_and_report(e);
    }
    return 2;  // unreachable: require_subcommand(1) guarantees one branch
}
