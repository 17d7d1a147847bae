#pragma once

#include "specstack/data_pipeline.hpp"
#include "specstack/tree.hpp"
#include "specstack/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace specstack {

enum class ModelKind { pls, pca_lm, lda, enet, rf, gbm };

std::string kind_name(ModelKind k);
ModelKind parse_kind(const std::string& s);

using Hyperparams = std::map<std::string, double>;

struct TuningGrid {
    std::vector<Hyperparams> points;
};

struct ModelSpec {
    std::string id;  // roster name; defaults to the kind name
    ModelKind kind = ModelKind::pls;
    Task task = Task::regression;
    TuningGrid grid;
    std::uint64_t seed = 0;
};

// Targets for either task.
struct Targets {
    Task task = Task::regression;
    Vector y;                 // regression
    std::vector<int> labels;  // classification, values in [0, n_classes)
    int n_classes = 0;

    int size() const {
        return task == Task::regression ? static_cast<int>(y.size())
                                        : static_cast<int>(labels.size());
    }
    Targets subset(const IndexSet& rows) const;
};

// ---- per-kind fitted parameters ----

struct PlsModel {
    Vector x_mean;
    Vector y_mean;  // length q (1 for regression, K for one-hot classification)
    Matrix coef;    // p x q
    Matrix weights;        // p x a
    Matrix x_loadings;     // p x a
    Matrix y_loadings;     // q x a
    Matrix train_scores;   // n x a
    int ncomp = 0;
};

struct PcaLmModel {
    Vector x_mean;
    Matrix projection;  // p x ncomp
    Vector coef;        // ncomp
    double intercept = 0.0;
};

struct LdaModel {
    Matrix class_means;   // K x p
    Matrix pooled_cov;    // regularized
    Vector log_priors;    // K
    Matrix linear;        // K x p rows: S^-1 mu_k
    Vector offsets;       // K: -0.5 mu_k' S^-1 mu_k + log pi_k
    Matrix directions;    // p x min(K-1, p), unit norm
    Vector grand_mean;    // p, for projection
};

struct EnetModel {
    double alpha = 1.0;
    double lambda = 0.0;
    Vector coef;             // regression
    double intercept = 0.0;  // regression
    Matrix class_coef;       // K x p (classification)
    Vector class_intercept;  // K
    int sweeps = 0;
};

struct RfModel {
    std::vector<Tree> trees;
    int n_classes = 0;
    bool constant_target = false;  // degenerate y warning
};

struct GbmModel {
    double f0 = 0.0;
    double shrinkage = 0.1;
    std::vector<Tree> trees;
};

struct TrainedModel {
    ModelKind kind = ModelKind::pls;
    Task task = Task::regression;
    Hyperparams params;
    int n_features = 0;
    std::optional<Standardizer> standardizer;  // set by the harness
    std::variant<PlsModel, PcaLmModel, LdaModel, EnetModel, RfModel, GbmModel> fitted;
};

// ---- fit operations ----

// NIPALS with X-block deflation; classification via one-hot response.
TrainedModel fit_pls(const Matrix& X, const Targets& y, int ncomp);

TrainedModel fit_pca_lm(const Matrix& X, const Vector& y, int ncomp);

TrainedModel fit_lda(const Matrix& X, const std::vector<int>& labels, int n_classes);

struct EnetOptions {
    double tol = 1e-7;
    int max_sweeps = 10000;
};
TrainedModel fit_enet(const Matrix& X, const Targets& y, double alpha, double lambda,
                      const EnetOptions& opts = {});

// Warm-started coordinate descent down a decreasing lambda sequence;
// returns the model at each lambda (regression only).
std::vector<Vector> enet_path(const Matrix& X, const Vector& y, double alpha,
                              const std::vector<double>& lambdas,
                              std::vector<double>* intercepts = nullptr,
                              const EnetOptions& opts = {});

struct RfParams {
    int ntrees = 500;
    int mtry = 0;  // 0 = floor(sqrt(p)) classification, floor(p/3) regression
    int min_node = 5;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};
TrainedModel fit_rf(const Matrix& X, const Targets& y, const RfParams& params);

struct GbmParams {
    int ntrees = 200;
    int depth = 3;
    double shrinkage = 0.1;
    int min_node = 10;
    std::uint64_t seed = 0;
};
TrainedModel fit_gbm(const Matrix& X, const Vector& y, const GbmParams& params);

// Generic dispatch used by the tuner and the harness.
TrainedModel fit_model(ModelKind kind, Task task, const Matrix& X, const Targets& y,
                       const Hyperparams& params, std::uint64_t seed);

Prediction predict(const TrainedModel& model, const Matrix& X);

// LDA projection onto the discriminant directions.
Matrix lda_project(const TrainedModel& model, const Matrix& X);

// ---- tuning ----

// Inner-CV grid search; minimizes mean fold RMSE (regression) or maximizes
// mean fold accuracy (classification). Near-ties go to the simpler model:
// fewer components, then larger lambda, then fewer trees.
struct FoldPlan;  // cv_harness.hpp

Hyperparams tune(const ModelSpec& spec, const Matrix& X, const Targets& y,
                 const std::vector<IndexSet>& fold_rows);

// Lexicographic complexity key backing the tie-break.
std::vector<double> complexity_key(const Hyperparams& params);

TuningGrid default_grid(ModelKind kind, Task task, int n, int p);
TuningGrid expand_grid(const std::map<std::string, std::vector<double>>& values);
void validate_grid(ModelKind kind, Task task, const TuningGrid& grid);

}  // namespace specstack
