#pragma once

#include "specstack/config.hpp"
#include "specstack/data_pipeline.hpp"
#include "specstack/models.hpp"
#include "specstack/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace specstack {

struct Split {
    IndexSet train;
    IndexSet test;
};

struct SplitPlan {
    std::vector<Split> splits;
    double train_fraction = 0.75;
    std::uint64_t master_seed = 0;
    bool stratified = false;

    int n_splits() const { return static_cast<int>(splits.size()); }
};

SplitPlan make_random_splits(int n_rows, int n_splits, double train_fraction,
                             const std::vector<int>* stratify_labels, int n_classes,
                             std::uint64_t master_seed);

// Partition of `rows` into k folds whose sizes differ by at most one.
std::vector<IndexSet> make_kfold(const IndexSet& rows, int k,
                                 const std::vector<int>* stratify_labels,
                                 std::uint64_t seed);

double metric_rmse(const Vector& pred, const Vector& obs);
double metric_accuracy(const std::vector<int>& pred, const std::vector<int>& obs);

struct PerformanceRecord {
    int split_id = 0;
    std::string model_id;
    std::string trait_id;
    std::string metric;  // "rmse" | "acc"
    double value = 0.0;  // NaN = failed cell
};

struct CellStatus {
    int split_id = 0;
    std::string model_id;
    std::string trait_id;
    bool ok = true;
    std::string message;
};

struct BenchmarkResult {
    std::vector<PerformanceRecord> records;
    std::vector<CellStatus> statuses;
    int failures = 0;
};

// External candidate predictions keyed by (split, row).
struct ExternalCandidate {
    std::string id;
    // per split: row -> prediction (regression value or K probabilities)
    std::vector<std::map<int, Vector>> by_split;
    bool covers_train = false;  // OOF-capable when train rows are present
};

std::vector<ExternalCandidate> ingest_external_predictions(const std::string& path,
                                                           const SplitPlan& plan,
                                                           int n_classes);

// Ensemble roster names.
inline const std::vector<std::string>& regression_ensembles() {
    static const std::vector<std::string> v{"ens_nonneg", "ens_lasso", "ens_lm", "ens_rf",
                                            "ens_ma"};
    return v;
}
inline const std::vector<std::string>& classification_ensembles() {
    static const std::vector<std::string> v{"ens_nonneg", "ens_maj_vote"};
    return v;
}

struct BenchmarkConfig {
    Task task = Task::regression;
    std::vector<ModelSpec> candidates;
    std::vector<std::string> ensembles;
    int n_splits = 50;
    double train_fraction = 0.75;
    int inner_folds = 10;
    std::uint64_t master_seed = 0;
    int jobs = 1;
    std::vector<ExternalCandidate> external;
    // Classification-only wavelength selection, applied per split on
    // training rows.
    int fisher_top_k = 0;  // 0 = disabled
    bool ga_enabled = false;
    Config ga_config;
};

// Builds candidate ModelSpecs from a run config (roster + grids).
std::vector<ModelSpec> build_roster(const Config& cfg, Task task, int n, int p);

// The full experiment loop: tune+fit candidates per split, build OOF,
// fit meta-learners, blend on the test set, emit one record per
// (split, model, trait).
BenchmarkResult run_benchmark(const SpectraDataset& data, const BenchmarkConfig& config,
                              const SplitPlan* plan_override = nullptr);

std::string performance_table_to_csv(const std::vector<PerformanceRecord>& records);
std::vector<PerformanceRecord> performance_table_from_csv(const std::string& path);

std::string manifest_text(const Config& cfg, const BenchmarkResult& result);

}  // namespace specstack
