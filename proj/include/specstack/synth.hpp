#pragma once

#include "specstack/data_pipeline.hpp"

#include <cstdint>
#include <string>

namespace specstack {

// Synthetic spectra with serially correlated features: smooth latent
// factor loadings plus low feature noise, so neighbouring wavelengths move
// together the way real absorbance bands do.

struct SynthRegressionParams {
    int n = 400;
    int p = 150;
    int n_traits = 1;
    int n_factors = 6;
    double noise_sd = 0.35;       // trait noise relative to unit signal sd
    double feature_noise = 0.02;  // per-wavelength absorbance noise
    std::uint64_t seed = 1;
};

// Traits carry a mixed linear + pairwise-interaction signal in the latent
// factors.
SpectraDataset synth_regression(const SynthRegressionParams& params);

struct SynthClassificationParams {
    int n = 600;
    int p = 60;
    int n_factors = 5;
    double overlap_sep = 1.1;   // distance between the 2 overlapping classes
    double distinct_sep = 4.0;  // distance to the well-separated class
    double feature_noise = 0.02;
    std::uint64_t seed = 1;
};

// Three-class Gaussian mixture; classes 0 and 1 overlap, class 2 stands
// apart.
SpectraDataset synth_classification(const SynthClassificationParams& params);

// Raw-table form for the preprocess pipeline: transmittance = 10^-A.
std::string synth_to_transmittance_csv(const SpectraDataset& data);

}  // namespace specstack
