#include <catch2/catch_amalgamated.hpp>

#include <xnucsens/metrics.hpp>
#include <xnucsens/rng.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace xnucsens;

namespace {

CoilSensitivitySet random_set(const GridSpec& grid, int n_coils, std::uint64_t seed) {
    CoilSensitivitySet set;
    set.grid = grid;
    set.maps.assign(n_coils, ComplexImage(grid));
    SeededRng rng(seed);
    for (auto& m : set.maps)
        for (auto& z : m.samples) z = rng.next_complex_gaussian();
    return set;
}

SupportMask full_mask(const GridSpec& grid) {
    SupportMask mask(grid.width, grid.height);
    for (auto& v : mask.inside) v = 1;
    return mask;
}

}  // namespace

TEST_CASE("map mse on a worked example", "[metrics]") {
    GridSpec grid{10, 10, 1.0, 0.0, 0.0, 0.0};
    CoilSensitivitySet truth = random_set(grid, 2, 11);
    CoilSensitivitySet est = truth;
    // Offset every coil-0 voxel by 0.1: per-coil mse {0.01, 0}.
    for (auto& z : est.maps[0].samples) z += cdouble(0.1, 0.0);

    MseReport report = map_mse(est, truth, full_mask(grid));
    REQUIRE(report.n_voxels == 100u);
    REQUIRE(report.per_coil.size() == 2u);
    REQUIRE(report.per_coil[0] == Catch::Approx(0.01).epsilon(1e-12));
    REQUIRE(report.per_coil[1] == 0.0);
    REQUIRE(report.aggregate == Catch::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("aggregate is the mean of the per-coil errors", "[metrics]") {
    GridSpec grid{6, 4, 1.0, 0.0, 0.0, 0.0};
    CoilSensitivitySet truth = random_set(grid, 3, 21);
    CoilSensitivitySet est = random_set(grid, 3, 22);
    SupportMask mask(6, 4);
    for (int ix = 0; ix < 6; ++ix) mask.set(ix, 1, true);

    MseReport report = map_mse(est, truth, mask);
    double mean = (report.per_coil[0] + report.per_coil[1] + report.per_coil[2]) / 3.0;
    REQUIRE(report.aggregate == Catch::Approx(mean).epsilon(1e-14));
    REQUIRE(report.n_voxels == 6u);

    // Swapping the arguments leaves the error unchanged.
    MseReport swapped = map_mse(truth, est, mask);
    REQUIRE(swapped.aggregate == Catch::Approx(report.aggregate).epsilon(1e-14));
}

TEST_CASE("mse scales with the squared magnitude of the difference", "[metrics]") {
    GridSpec grid{5, 5, 1.0, 0.0, 0.0, 0.0};
    CoilSensitivitySet truth = random_set(grid, 2, 31);
    CoilSensitivitySet est = random_set(grid, 2, 32);
    SupportMask mask = full_mask(grid);

    double base = map_mse(est, truth, mask).aggregate;

    // est' - truth' = 3 (est - truth) when both are tripled.
    CoilSensitivitySet est3 = est, truth3 = truth;
    for (auto& m : est3.maps)
        for (auto& z : m.samples) z *= 3.0;
    for (auto& m : truth3.maps)
        for (auto& z : m.samples) z *= 3.0;
    REQUIRE(map_mse(est3, truth3, mask).aggregate == Catch::Approx(9.0 * base).epsilon(1e-12));
}

TEST_CASE("phase alignment removes a global per-voxel rotation", "[metrics]") {
    GridSpec grid{8, 8, 1.0, 0.0, 0.0, 0.0};
    CoilSensitivitySet truth = random_set(grid, 3, 41);
    CoilSensitivitySet est = truth;
    const cdouble phase = std::polar(1.0, std::numbers::pi / 3.0);
    for (auto& m : est.maps)
        for (auto& z : m.samples) z *= phase;
    SupportMask mask = full_mask(grid);

    MseReport raw = map_mse(est, truth, mask, false);
    MseReport aligned = map_mse(est, truth, mask, true);
    REQUIRE(raw.aggregate > 0.1);
    REQUIRE(aligned.aggregate < 1e-25);
}

TEST_CASE("phase alignment never increases the error", "[metrics]") {
    GridSpec grid{7, 6, 1.0, 0.0, 0.0, 0.0};
    SupportMask mask = full_mask(grid);
    for (std::uint64_t seed = 50; seed < 60; ++seed) {
        CoilSensitivitySet truth = random_set(grid, 2, seed);
        CoilSensitivitySet est = random_set(grid, 2, seed + 1000);
        double raw = map_mse(est, truth, mask, false).aggregate;
        double aligned = map_mse(est, truth, mask, true).aggregate;
        REQUIRE(aligned <= raw + 1e-15);
    }
}

TEST_CASE("map mse input validation", "[metrics]") {
    GridSpec grid{4, 4, 1.0, 0.0, 0.0, 0.0};
    CoilSensitivitySet truth = random_set(grid, 2, 61);
    CoilSensitivitySet est = random_set(grid, 2, 62);

    CoilSensitivitySet fewer = random_set(grid, 1, 63);
    REQUIRE_THROWS_AS(map_mse(fewer, truth, full_mask(grid)), std::invalid_argument);

    GridSpec other{4, 4, 2.0, 0.0, 0.0, 0.0};
    CoilSensitivitySet shifted = random_set(other, 2, 64);
    REQUIRE_THROWS_AS(map_mse(shifted, truth, full_mask(other)), std::invalid_argument);

    SupportMask wrong(3, 4);
    REQUIRE_THROWS_AS(map_mse(est, truth, wrong), std::invalid_argument);

    SupportMask empty(4, 4);
    REQUIRE_THROWS_AS(map_mse(est, truth, empty), std::invalid_argument);
}

TEST_CASE("roi snr matches the Rayleigh/Gaussian oracle", "[metrics]") {
    // Complex Gaussian field with unit per-component sigma: the magnitude is
    // Rayleigh with mean sigma * sqrt(pi / 2), the real-part std is sigma.
    GridSpec grid{128, 128, 1.0, 0.0, 0.0, 0.0};
    CombinedImage combined;
    combined.image = ComplexImage(grid);
    SeededRng rng(71);
    for (auto& z : combined.image.samples) z = rng.next_complex_gaussian();

    SupportMask left(128, 128), right(128, 128);
    for (int iy = 0; iy < 128; ++iy)
        for (int ix = 0; ix < 128; ++ix) (ix < 64 ? left : right).set(ix, iy, true);

    RoiSnrReport report = roi_snr(combined, left, right);
    const double rayleigh_mean = std::sqrt(std::numbers::pi / 2.0);
    REQUIRE_FALSE(report.unbounded);
    REQUIRE(report.signal_mean == Catch::Approx(rayleigh_mean).epsilon(0.05));
    REQUIRE(report.noise_std == Catch::Approx(1.0).epsilon(0.05));
    REQUIRE(report.snr == Catch::Approx(rayleigh_mean).epsilon(0.10));
}

TEST_CASE("roi snr is invariant under rescaling the image", "[metrics]") {
    GridSpec grid{16, 16, 1.0, 0.0, 0.0, 0.0};
    CombinedImage combined;
    combined.image = ComplexImage(grid);
    SeededRng rng(72);
    for (auto& z : combined.image.samples) z = rng.next_complex_gaussian();

    SupportMask signal(16, 16), noise(16, 16);
    for (int iy = 0; iy < 16; ++iy)
        for (int ix = 0; ix < 16; ++ix) (iy < 8 ? signal : noise).set(ix, iy, true);

    RoiSnrReport base = roi_snr(combined, signal, noise);
    for (auto& z : combined.image.samples) z *= 7.25;
    RoiSnrReport scaled = roi_snr(combined, signal, noise);
    REQUIRE(scaled.snr == Catch::Approx(base.snr).epsilon(1e-12));
}

TEST_CASE("a spread-free noise roi is reported as unbounded", "[metrics]") {
    GridSpec grid{4, 4, 1.0, 0.0, 0.0, 0.0};
    CombinedImage combined;
    combined.image = ComplexImage(grid);
    for (auto& z : combined.image.samples) z = cdouble(2.0, -1.0);

    SupportMask signal(4, 4), noise(4, 4);
    signal.set(0, 0, true);
    noise.set(3, 3, true);
    noise.set(2, 3, true);

    RoiSnrReport report = roi_snr(combined, signal, noise);
    REQUIRE(report.unbounded);
    REQUIRE(std::isinf(report.snr));
    REQUIRE(report.noise_std == 0.0);
    REQUIRE(report.signal_mean == Catch::Approx(std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("roi validation", "[metrics]") {
    GridSpec grid{4, 4, 1.0, 0.0, 0.0, 0.0};
    CombinedImage combined;
    combined.image = ComplexImage(grid);

    SupportMask signal(4, 4), noise(4, 4), wrong(3, 4), empty(4, 4);
    signal.set(0, 0, true);
    noise.set(1, 1, true);

    REQUIRE_NOTHROW(roi_snr(combined, signal, noise));
    REQUIRE_THROWS_AS(roi_snr(combined, wrong, noise), std::invalid_argument);
    REQUIRE_THROWS_AS(roi_snr(combined, signal, empty), std::invalid_argument);
    REQUIRE_THROWS_AS(roi_snr(combined, empty, noise), std::invalid_argument);

    SupportMask overlap = signal;
    REQUIRE_THROWS_AS(roi_snr(combined, signal, overlap), std::invalid_argument);
}
