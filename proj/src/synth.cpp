#include "specstack/synth.hpp"

#include "specstack/csv.hpp"
#include "specstack/rng.hpp"

#include <cmath>
#include <sstream>

namespace specstack {

namespace {

// Smooth Gaussian-bump loadings across the grid.
Matrix factor_loadings(int p, int n_factors, Rng& rng) {
    Matrix phi(n_factors, p);
    for (int f = 0; f < n_factors; ++f) {
        const double center = (f + 0.5 + 0.3 * rng.next_double()) / n_factors * p;
        const double width = p / (1.6 * n_factors) * (0.8 + 0.4 * rng.next_double());
        for (int j = 0; j < p; ++j) {
            const double z = (j - center) / width;
            phi(f, j) = std::exp(-0.5 * z * z);
        }
    }
    return phi;
}

std::vector<double> default_grid_points(int p) {
    std::vector<double> w(static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j)
        w[static_cast<std::size_t>(j)] = 900.0 + j * (4100.0 / std::max(1, p - 1));
    return w;
}

void fill_spectra(SpectraDataset& d, const Matrix& scores, const Matrix& phi,
                  double feature_noise, Rng& rng) {
    const int n = static_cast<int>(scores.rows());
    const int p = static_cast<int>(phi.cols());
    d.absorbance.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) {
            double v = 0.4;  // baseline keeps absorbance positive
            for (int f = 0; f < phi.rows(); ++f) v += 0.25 * scores(i, f) * phi(f, j);
            d.absorbance(i, j) = v + feature_noise * rng.next_normal();
        }
    d.wavenumbers = default_grid_points(p);
    for (int i = 0; i < n; ++i) d.sample_ids.push_back("s" + std::to_string(i + 1));
}

}  // namespace

SpectraDataset synth_regression(const SynthRegressionParams& params) {
    Rng rng(derive_seed(params.seed, {401}));
    const int n = params.n, p = params.p, L = params.n_factors;

    Matrix scores(n, L);
    for (int i = 0; i < n; ++i)
        for (int f = 0; f < L; ++f) scores(i, f) = rng.next_normal();
    const Matrix phi = factor_loadings(p, L, rng);

    SpectraDataset d;
    fill_spectra(d, scores, phi, params.feature_noise, rng);

    d.traits.resize(n, params.n_traits);
    for (int t = 0; t < params.n_traits; ++t) {
        Rng trng(derive_seed(params.seed, {402, static_cast<std::uint64_t>(t)}));
        Vector coef(L);
        for (int f = 0; f < L; ++f) coef[f] = trng.next_normal();
        coef /= coef.norm();
        const double inter_w = 0.6 + 0.2 * trng.next_double();
        const int fa = trng.next_int(L);
        int fb = trng.next_int(L);
        if (fb == fa) fb = (fa + 1) % L;
        for (int i = 0; i < n; ++i) {
            const double linear = scores.row(i).dot(coef.transpose());
            const double interaction = inter_w * scores(i, fa) * scores(i, fb);
            d.traits(i, t) = linear + interaction + params.noise_sd * trng.next_normal();
        }
        d.trait_names.push_back("trait" + std::to_string(t + 1));
    }
    d.trait_logged.assign(static_cast<std::size_t>(params.n_traits), false);
    return d;
}

SpectraDataset synth_classification(const SynthClassificationParams& params) {
    Rng rng(derive_seed(params.seed, {403}));
    const int n = params.n, p = params.p, L = params.n_factors;

    // Class means in factor space: 0 and 1 close together, 2 far away.
    Matrix mu = Matrix::Zero(3, L);
    mu(1, 0) = params.overlap_sep;
    mu(2, 1) = params.distinct_sep;
    mu(2, 0) = 0.5 * params.distinct_sep;

    SpectraDataset d;
    d.label_name = "diet";
    d.classes = {"CLV", "GRS", "TMR"};

    Matrix scores(n, L);
    for (int i = 0; i < n; ++i) {
        const int k = i % 3;  // balanced classes
        d.labels.push_back(k);
        for (int f = 0; f < L; ++f) scores(i, f) = mu(k, f) + rng.next_normal();
    }
    const Matrix phi = factor_loadings(p, L, rng);
    fill_spectra(d, scores, phi, params.feature_noise, rng);
    d.traits.resize(n, 0);
    return d;
}

std::string synth_to_transmittance_csv(const SpectraDataset& data) {
    std::ostringstream out;
    out << "sample_id";
    for (double w : data.wavenumbers) out << ",w" << fmt_double(w);
    for (const auto& name : data.trait_names) out << ',' << name;
    if (data.has_labels()) out << ',' << data.label_name;
    out << '\n';
    for (int i = 0; i < data.n_samples(); ++i) {
        out << data.sample_ids[static_cast<std::size_t>(i)];
        for (int j = 0; j < data.n_features(); ++j)
            out << ',' << fmt_double(std::pow(10.0, -data.absorbance(i, j)));
        for (Eigen::Index j = 0; j < data.traits.cols(); ++j)
            out << ',' << fmt_double(data.traits(i, j));
        if (data.has_labels())
            out << ','
                << data.classes[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])];
        out << '\n';
    }
    return out.str();
}

}  // namespace specstack
