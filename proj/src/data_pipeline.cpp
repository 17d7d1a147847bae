#include "specstack/data_pipeline.hpp"

#include "specstack/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace specstack {

namespace {

// Wavelength columns are named w<number>; everything else is a target.
std::optional<double> wavenumber_of(const std::string& name) {
    if (name.size() < 2 || name[0] != 'w') return std::nullopt;
    const std::string num = name.substr(1);
    std::size_t pos = 0;
    try {
        double v = std::stod(num, &pos);
        if (pos == num.size()) return v;
    } catch (const std::exception&) {
    }
    return std::nullopt;
}

}  // namespace

RawSpectraTable parse_table(const std::string& csv_text, const Schema& schema,
                            const std::string& origin) {
    const CsvTable csv = parse_csv(csv_text);
    if (csv.header.empty() || csv.header[0] != "sample_id")
        throw DataError(origin + ": first column must be sample_id");

    RawSpectraTable t;
    std::vector<int> wave_cols;
    std::vector<int> target_cols;
    for (std::size_t j = 1; j < csv.header.size(); ++j) {
        if (auto w = wavenumber_of(csv.header[j])) {
            if (!t.wavenumbers.empty() && *w <= t.wavenumbers.back())
                throw DataError(origin + ": wavenumbers not strictly increasing at column " +
                                csv.header[j]);
            t.wavenumbers.push_back(*w);
            wave_cols.push_back(static_cast<int>(j));
        } else {
            target_cols.push_back(static_cast<int>(j));
        }
    }
    if (wave_cols.empty()) throw DataError(origin + ": no wavelength columns (w<number>)");

    const int n = static_cast<int>(csv.rows.size());
    const int p = static_cast<int>(wave_cols.size());
    if (n == 0) throw DataError(origin + ": no data rows");

    std::set<std::string> seen_ids;
    t.spectra.resize(n, p);
    for (int i = 0; i < n; ++i) {
        const auto& row = csv.rows[static_cast<std::size_t>(i)];
        const std::string& id = row[0];
        if (!seen_ids.insert(id).second)
            throw DataError(origin + ": duplicate sample id '" + id + "'");
        t.sample_ids.push_back(id);
        for (int j = 0; j < p; ++j) {
            const std::string& cell = row[static_cast<std::size_t>(wave_cols[j])];
            const double v = parse_double(cell, origin + " row " + id + ", column " +
                                                    csv.header[static_cast<std::size_t>(wave_cols[j])]);
            if (v <= 0)
                throw DataError(origin + ": non-positive transmittance at row " + id +
                                ", column " + csv.header[static_cast<std::size_t>(wave_cols[j])]);
            t.spectra(i, j) = v;
        }
    }

    // Split targets into traits and at most one label column.
    std::vector<int> trait_cols;
    int label_col = -1;
    for (int j : target_cols) {
        const std::string& name = csv.header[static_cast<std::size_t>(j)];
        auto it = schema.find(name);
        const ColumnRole role = it == schema.end() ? ColumnRole::trait : it->second;
        if (role == ColumnRole::label) {
            if (label_col >= 0)
                throw DataError(origin + ": more than one label column declared");
            label_col = j;
            t.label_name = name;
        } else {
            trait_cols.push_back(j);
            t.trait_names.push_back(name);
        }
    }

    t.traits.resize(n, static_cast<int>(trait_cols.size()));
    for (int i = 0; i < n; ++i)
        for (std::size_t k = 0; k < trait_cols.size(); ++k)
            t.traits(i, static_cast<int>(k)) =
                parse_double(csv.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(trait_cols[k])],
                             origin + " trait " + t.trait_names[k]);

    if (label_col >= 0) {
        std::set<std::string> classes;
        for (int i = 0; i < n; ++i)
            classes.insert(csv.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(label_col)]);
        t.classes.assign(classes.begin(), classes.end());
        for (int i = 0; i < n; ++i) {
            const std::string& c =
                csv.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(label_col)];
            const auto it = std::lower_bound(t.classes.begin(), t.classes.end(), c);
            t.labels.push_back(static_cast<int>(it - t.classes.begin()));
        }
    }
    return t;
}

RawSpectraTable load_table(const std::string& path, const Schema& schema) {
    return parse_table(read_file(path), schema, path);
}

RawSpectraTable to_absorbance(const RawSpectraTable& table) {
    RawSpectraTable out = table;
    for (Eigen::Index i = 0; i < out.spectra.rows(); ++i)
        for (Eigen::Index j = 0; j < out.spectra.cols(); ++j) {
            const double v = out.spectra(i, j);
            if (v <= 0)
                throw DataError("non-positive transmittance at row " +
                                table.sample_ids[static_cast<std::size_t>(i)]);
            out.spectra(i, j) = std::log10(1.0 / v);
        }
    out.is_absorbance = true;
    return out;
}

DropResult drop_noise_regions(const RawSpectraTable& table,
                              const std::vector<Interval>& regions) {
    DropResult res;
    std::vector<int> keep;
    for (std::size_t j = 0; j < table.wavenumbers.size(); ++j) {
        const double w = table.wavenumbers[j];
        bool inside = false;
        for (const auto& iv : regions)
            if (iv.contains(w)) {
                inside = true;
                break;
            }
        if (!inside) keep.push_back(static_cast<int>(j));
    }
    if (keep.empty()) throw DataError("empty surviving grid after noise-region removal");

    SpectraDataset& d = res.dataset;
    d.sample_ids = table.sample_ids;
    d.trait_names = table.trait_names;
    d.traits = table.traits;
    d.trait_logged.assign(table.trait_names.size(), false);
    d.label_name = table.label_name;
    d.classes = table.classes;
    d.labels = table.labels;
    d.absorbance.resize(table.spectra.rows(), static_cast<int>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        d.wavenumbers.push_back(table.wavenumbers[static_cast<std::size_t>(keep[k])]);
        d.absorbance.col(static_cast<int>(k)) = table.spectra.col(keep[k]);
    }
    res.retained = static_cast<int>(keep.size());
    res.removed = static_cast<int>(table.wavenumbers.size()) - res.retained;
    return res;
}

Standardizer fit_standardizer(const Matrix& X, const IndexSet& rows,
                              const std::string& fitted_on) {
    if (rows.empty()) throw DataError("fit_standardizer: empty training index set");
    const int p = static_cast<int>(X.cols());
    const auto n = static_cast<double>(rows.size());
    Standardizer s;
    s.fitted_on = fitted_on;
    s.means.resize(p);
    s.sds.resize(p);
    for (int j = 0; j < p; ++j) {
        double sum = 0;
        for (int r : rows) sum += X(r, j);
        const double mean = sum / n;
        double ss = 0;
        for (int r : rows) {
            const double d = X(r, j) - mean;
            ss += d * d;
        }
        const double sd = rows.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        if (sd < 1e-12)
            throw DataError("constant column " + std::to_string(j) +
                            " on training rows; cannot standardize");
        s.means[j] = mean;
        s.sds[j] = sd;
    }
    return s;
}

Matrix apply_standardizer(const Standardizer& std_, const Matrix& X) {
    if (X.cols() != std_.means.size())
        throw DataError("apply_standardizer: expected " + std::to_string(std_.means.size()) +
                        " columns, got " + std::to_string(X.cols()));
    Matrix out = X;
    out.rowwise() -= std_.means.transpose();
    out.array().rowwise() /= std_.sds.transpose().array();
    return out;
}

Vector standardize_vector(const Vector& y, const IndexSet& rows, double* mean_out,
                          double* sd_out) {
    Matrix m = y;
    const Standardizer s = fit_standardizer(m, rows, "");
    if (mean_out) *mean_out = s.means[0];
    if (sd_out) *sd_out = s.sds[0];
    return (y.array() - s.means[0]) / s.sds[0];
}

double sample_skewness(const Vector& x) {
    const auto n = static_cast<double>(x.size());
    if (x.size() < 3) return 0.0;
    const double mean = x.mean();
    double m2 = 0, m3 = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = x[i] - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0) return 0.0;
    const double g1 = m3 / std::pow(m2, 1.5);
    return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

LogTransformResult log_transform_traits(const Matrix& traits,
                                        const std::vector<std::string>& names,
                                        double skewness_cutoff) {
    LogTransformResult res;
    res.traits = traits;
    res.flags.assign(static_cast<std::size_t>(traits.cols()), false);
    for (Eigen::Index j = 0; j < traits.cols(); ++j) {
        const double skew = sample_skewness(traits.col(j));
        if (skew > skewness_cutoff) {
            for (Eigen::Index i = 0; i < traits.rows(); ++i) {
                if (traits(i, j) <= 0)
                    throw DataError("trait " + names[static_cast<std::size_t>(j)] +
                                    " selected for log transform contains value <= 0");
                res.traits(i, j) = std::log(traits(i, j));
            }
            res.flags[static_cast<std::size_t>(j)] = true;
        }
    }
    return res;
}

std::vector<Interval> default_noise_regions() {
    const double inf = std::numeric_limits<double>::infinity();
    return {{1600.0, 1710.0}, {2990.0, 3690.0}, {3822.0, inf}};
}

std::string dataset_to_csv(const SpectraDataset& data) {
    std::ostringstream out;
    out << "sample_id";
    for (double w : data.wavenumbers) out << ",w" << fmt_double(w);
    for (const auto& name : data.trait_names) out << ',' << name;
    if (data.has_labels()) out << ',' << data.label_name;
    out << '\n';
    for (int i = 0; i < data.n_samples(); ++i) {
        out << data.sample_ids[static_cast<std::size_t>(i)];
        for (int j = 0; j < data.n_features(); ++j) out << ',' << fmt_double(data.absorbance(i, j));
        for (Eigen::Index j = 0; j < data.traits.cols(); ++j)
            out << ',' << fmt_double(data.traits(i, j));
        if (data.has_labels())
            out << ',' << data.classes[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(i)])];
        out << '\n';
    }
    return out.str();
}

SpectraDataset dataset_from_csv_file(const std::string& path, const Schema& schema) {
    // Processed datasets hold absorbance, which may legitimately be <= 0,
    // so they bypass the transmittance positivity check.
    const CsvTable csv = read_csv(path);
    if (csv.header.empty() || csv.header[0] != "sample_id")
        throw DataError(path + ": first column must be sample_id");

    SpectraDataset d;
    std::vector<int> wave_cols, trait_cols;
    int label_col = -1;
    for (std::size_t j = 1; j < csv.header.size(); ++j) {
        if (auto w = wavenumber_of(csv.header[j])) {
            d.wavenumbers.push_back(*w);
            wave_cols.push_back(static_cast<int>(j));
        } else {
            auto it = schema.find(csv.header[j]);
            const ColumnRole role = it == schema.end() ? ColumnRole::trait : it->second;
            if (role == ColumnRole::label) {
                if (label_col >= 0) throw DataError(path + ": more than one label column");
                label_col = static_cast<int>(j);
                d.label_name = csv.header[j];
            } else {
                trait_cols.push_back(static_cast<int>(j));
                d.trait_names.push_back(csv.header[j]);
            }
        }
    }
    const int n = static_cast<int>(csv.rows.size());
    if (n == 0) throw DataError(path + ": no data rows");
    d.absorbance.resize(n, static_cast<int>(wave_cols.size()));
    d.traits.resize(n, static_cast<int>(trait_cols.size()));
    std::set<std::string> seen;
    for (int i = 0; i < n; ++i) {
        const auto& row = csv.rows[static_cast<std::size_t>(i)];
        if (!seen.insert(row[0]).second)
            throw DataError(path + ": duplicate sample id '" + row[0] + "'");
        d.sample_ids.push_back(row[0]);
        for (std::size_t k = 0; k < wave_cols.size(); ++k)
            d.absorbance(i, static_cast<int>(k)) =
                parse_double(row[static_cast<std::size_t>(wave_cols[k])], path);
        for (std::size_t k = 0; k < trait_cols.size(); ++k)
            d.traits(i, static_cast<int>(k)) =
                parse_double(row[static_cast<std::size_t>(trait_cols[k])], path);
    }
    if (label_col >= 0) {
        std::set<std::string> classes;
        for (int i = 0; i < n; ++i)
            classes.insert(csv.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(label_col)]);
        d.classes.assign(classes.begin(), classes.end());
        for (int i = 0; i < n; ++i) {
            const std::string& c =
                csv.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(label_col)];
            d.labels.push_back(static_cast<int>(
                std::lower_bound(d.classes.begin(), d.classes.end(), c) - d.classes.begin()));
        }
    }
    d.trait_logged.assign(d.trait_names.size(), false);
    return d;
}

}  // namespace specstack
