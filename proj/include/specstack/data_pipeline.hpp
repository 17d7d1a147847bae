#pragma once

#include "specstack/config.hpp"
#include "specstack/types.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace specstack {

enum class ColumnRole { trait, label };

// Maps non-spectral column names to their role; unlisted target columns
// default to `trait`.
using Schema = std::map<std::string, ColumnRole>;

// Raw spectral table as read from disk. `spectra` holds transmittance
// until to_absorbance() is applied, absorbance afterwards.
struct RawSpectraTable {
    std::vector<std::string> sample_ids;
    std::vector<double> wavenumbers;
    Matrix spectra;  // n_samples x n_wavelengths
    bool is_absorbance = false;

    std::vector<std::string> trait_names;
    Matrix traits;  // n_samples x n_traits

    std::string label_name;            // empty when no label column
    std::vector<std::string> classes;  // sorted distinct labels
    std::vector<int> labels;           // index into classes, per sample
};

// Post-preprocessing dataset: absorbance on the retained grid plus targets.
struct SpectraDataset {
    std::vector<std::string> sample_ids;
    std::vector<double> wavenumbers;
    Matrix absorbance;

    std::vector<std::string> trait_names;
    Matrix traits;
    std::vector<bool> trait_logged;  // natural-log transform applied

    std::string label_name;
    std::vector<std::string> classes;
    std::vector<int> labels;

    int n_samples() const { return static_cast<int>(absorbance.rows()); }
    int n_features() const { return static_cast<int>(absorbance.cols()); }
    bool has_labels() const { return !classes.empty(); }
};

// Per-column training statistics; stored so test rows are transformed with
// train-only numbers.
struct Standardizer {
    Vector means;
    Vector sds;  // n-1 denominator, all > 0
    std::string fitted_on;

    bool operator==(const Standardizer& o) const {
        return means == o.means && sds == o.sds && fitted_on == o.fitted_on;
    }
};

// Column header convention: sample_id, w<wavenumber>..., <target columns>.
RawSpectraTable load_table(const std::string& path, const Schema& schema = {});
RawSpectraTable parse_table(const std::string& csv_text, const Schema& schema = {},
                            const std::string& origin = "<memory>");

// A = log10(1/T); every cell must be strictly positive.
RawSpectraTable to_absorbance(const RawSpectraTable& table);

struct DropResult {
    SpectraDataset dataset;
    int removed = 0;
    int retained = 0;
};

// Removes every wavenumber inside any interval; survivors keep their order.
DropResult drop_noise_regions(const RawSpectraTable& table,
                              const std::vector<Interval>& regions);

Standardizer fit_standardizer(const Matrix& X, const IndexSet& rows,
                              const std::string& fitted_on = "");
Matrix apply_standardizer(const Standardizer& std, const Matrix& X);

Vector standardize_vector(const Vector& y, const IndexSet& rows, double* mean_out = nullptr,
                          double* sd_out = nullptr);

// Adjusted Fisher-Pearson sample skewness; 0 for n < 3.
double sample_skewness(const Vector& x);

struct LogTransformResult {
    Matrix traits;
    std::vector<bool> flags;
};

// Natural-log transform for traits whose skewness exceeds the cutoff.
LogTransformResult log_transform_traits(const Matrix& traits,
                                        const std::vector<std::string>& names,
                                        double skewness_cutoff);

// Paper-style defaults for the regression spectra; overridable per dataset.
std::vector<Interval> default_noise_regions();

// Serialization for the preprocess CLI step.
std::string dataset_to_csv(const SpectraDataset& data);
SpectraDataset dataset_from_csv_file(const std::string& path, const Schema& schema = {});

}  // namespace specstack
