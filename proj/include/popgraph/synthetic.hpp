#pragma once

#include <cstdint>

#include "popgraph/cohort.hpp"

namespace popgraph {

// Parameterized stand-in for a restricted-access cohort: ages come from a
// truncated two-component normal mixture, features are age-driven signals
// through seeded random linear maps plus Gaussian noise at the requested
// signal-to-noise ratio, then min-max normalized.
struct SyntheticConfig {
    std::size_t n = 1000;
    std::size_t imaging_features = 68;     // M
    std::size_t categorical_phenotypes = 8;
    std::size_t continuous_phenotypes = 12;
    std::size_t categorical_levels = 4;
    // Defaults are calibrated so the default graph builders land inside the
    // 40k-50k edge budget at the 6500-subject reference scale.
    double snr = 10.0; // signal variance / noise variance; 0 = pure noise
    // Non-imaging phenotypes couple to age more weakly than imaging does;
    // their columns (and the categorical latents) use snr * phenotype_snr_scale.
    double phenotype_snr_scale = 0.4;

    double age_min = 47.0;
    double age_max = 81.0;
    double mix_weight = 0.7; // weight of the first age component
    double mix_mean1 = 63.0;
    double mix_sd1 = 7.0;
    double mix_mean2 = 72.0;
    double mix_sd2 = 5.0;

    std::uint64_t seed = 0;

    void validate() const;
};

Cohort generate_synthetic(const SyntheticConfig& config);

} // namespace popgraph
