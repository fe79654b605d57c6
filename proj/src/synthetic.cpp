#include "popgraph/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "popgraph/errors.hpp"
#include "popgraph/rng.hpp"

namespace popgraph {

void SyntheticConfig::validate() const {
    if (n < 10) throw ValidationError("synthetic: n must be at least 10");
    if (imaging_features == 0) throw ValidationError("synthetic: imaging_features must be >= 1");
    if (categorical_phenotypes + continuous_phenotypes == 0)
        throw ValidationError("synthetic: at least one phenotype required");
    if (categorical_levels < 2) throw ValidationError("synthetic: categorical_levels must be >= 2");
    if (!(snr >= 0.0) || !std::isfinite(snr))
        throw ValidationError("synthetic: snr must be finite and >= 0");
    if (!(phenotype_snr_scale >= 0.0) || !std::isfinite(phenotype_snr_scale))
        throw ValidationError("synthetic: phenotype_snr_scale must be finite and >= 0");
    if (!(age_min < age_max)) throw ValidationError("synthetic: age_min must be below age_max");
    if (mix_weight < 0.0 || mix_weight > 1.0)
        throw ValidationError("synthetic: mix_weight must lie in [0, 1]");
    if (mix_sd1 <= 0.0 || mix_sd2 <= 0.0)
        throw ValidationError("synthetic: mixture standard deviations must be positive");
}

namespace {

// Min-max to [0,1] in place; constant columns become zero.
void minmax_column(std::vector<double>& data, std::size_t n, std::size_t width, std::size_t col) {
    double lo = data[col], hi = data[col];
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, data[i * width + col]);
        hi = std::max(hi, data[i * width + col]);
    }
    if (hi > lo) {
        const double span = hi - lo;
        for (std::size_t i = 0; i < n; ++i)
            data[i * width + col] = (data[i * width + col] - lo) / span;
    } else {
        for (std::size_t i = 0; i < n; ++i) data[i * width + col] = 0.0;
    }
}

// One age-driven column: coeff * standardized_age + noise at the configured
// signal-to-noise ratio. snr == 0 yields pure noise.
void fill_signal_column(std::vector<double>& data, std::size_t n, std::size_t width, std::size_t col,
                        const std::vector<double>& std_age, double snr, Rng& rng) {
    const double coeff = rng.uniform(-1.0, 1.0);
    const double noise_sd = snr > 0.0 ? std::abs(coeff) / std::sqrt(snr) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double signal = snr > 0.0 ? coeff * std_age[i] : 0.0;
        data[i * width + col] = signal + rng.normal(0.0, noise_sd);
    }
    minmax_column(data, n, width, col);
}

} // namespace

Cohort generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const std::size_t n = config.n;

    Cohort cohort;
    cohort.n = n;
    cohort.schema.imaging_features = config.imaging_features;
    for (std::size_t c = 0; c < config.categorical_phenotypes; ++c)
        cohort.schema.phenotypes.emplace_back("cat_" + std::to_string(c), PhenotypeKind::categorical);
    for (std::size_t c = 0; c < config.continuous_phenotypes; ++c)
        cohort.schema.phenotypes.emplace_back("cont_" + std::to_string(c), PhenotypeKind::continuous);

    // Ages: truncated two-component normal mixture, imbalanced toward the
    // younger mode.
    cohort.age.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double a;
        do {
            if (rng.uniform() < config.mix_weight)
                a = rng.normal(config.mix_mean1, config.mix_sd1);
            else
                a = rng.normal(config.mix_mean2, config.mix_sd2);
        } while (a < config.age_min || a > config.age_max);
        cohort.age[i] = a;
    }

    const double mean = std::accumulate(cohort.age.begin(), cohort.age.end(), 0.0) /
                        static_cast<double>(n);
    double var = 0.0;
    for (const double a : cohort.age) var += (a - mean) * (a - mean);
    var /= static_cast<double>(n);
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    std::vector<double> std_age(n);
    for (std::size_t i = 0; i < n; ++i) std_age[i] = (cohort.age[i] - mean) / sd;

    const std::size_t m = config.imaging_features;
    cohort.imaging.assign(n * m, 0.0);
    for (std::size_t c = 0; c < m; ++c)
        fill_signal_column(cohort.imaging, n, m, c, std_age, config.snr, rng);

    const std::size_t k = cohort.schema.count();
    cohort.phenotypes.assign(n * k, 0.0);
    const double phen_snr = config.snr * config.phenotype_snr_scale;

    // Categorical phenotypes: quantile-bin an age-correlated latent.
    std::vector<double> latent(n);
    std::vector<std::size_t> order(n);
    for (std::size_t c = 0; c < config.categorical_phenotypes; ++c) {
        const double noise_sd = phen_snr > 0.0 ? 1.0 / std::sqrt(phen_snr) : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double signal = phen_snr > 0.0 ? std_age[i] : 0.0;
            latent[i] = signal + rng.normal(0.0, noise_sd);
        }
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (latent[a] != latent[b]) return latent[a] < latent[b];
            return a < b;
        });
        for (std::size_t rank = 0; rank < n; ++rank) {
            const std::size_t level = rank * config.categorical_levels / n;
            cohort.phenotypes[order[rank] * k + c] = static_cast<double>(level);
        }
    }

    for (std::size_t c = 0; c < config.continuous_phenotypes; ++c)
        fill_signal_column(cohort.phenotypes, n, k, config.categorical_phenotypes + c, std_age,
                           phen_snr, rng);

    cohort.validate();
    return cohort;
}

} // namespace popgraph
