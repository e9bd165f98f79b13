#pragma once

// Coil sensitivity map estimation for X-nuclei spectroscopic imaging:
// reference-peak and least-squares estimators over generalized spectral,
// dynamic and metabolite index sets, plus the synthetic benchmark pipeline
// (head phantom, Biot-Savart coil ring, rank-coupled ground truth, spectral
// encoding, seeded noise, coil combination and error metrics).

#include "acquisition.hpp"
#include "coilsim.hpp"
#include "config.hpp"
#include "core.hpp"
#include "estimators.hpp"
#include "fft.hpp"
#include "io.hpp"
#include "linalg.hpp"
#include "metrics.hpp"
#include "phantom.hpp"
#include "pipeline.hpp"
#include "recon.hpp"
#include "rng.hpp"
