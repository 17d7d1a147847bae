#pragma once

#include "specstack/cv_harness.hpp"
#include "specstack/models.hpp"
#include "specstack/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace specstack {

// Out-of-fold predictions for one split's training set. Regression: one
// column per candidate. Classification: one K-column probability block per
// candidate.
struct OofPredictions {
    int split_id = 0;
    IndexSet row_ids;               // training-row indices in dataset order
    std::vector<int> fold_of_row;   // fold that produced each row's prediction
    std::vector<std::string> candidate_ids;
    int n_classes = 0;  // 0 for regression
    Matrix values;      // n_train x M (regression) or n_train x M*K

    int n_candidates() const { return static_cast<int>(candidate_ids.size()); }

    bool operator==(const OofPredictions& o) const {
        return split_id == o.split_id && row_ids == o.row_ids &&
               fold_of_row == o.fold_of_row && candidate_ids == o.candidate_ids &&
               n_classes == o.n_classes && values == o.values;
    }
};

enum class MetaKind { nonneg, lasso, lm, rf, nonneg_logistic, model_average, majority_vote };

std::string meta_kind_name(MetaKind k);
MetaKind parse_meta_kind(const std::string& s);

struct MetaCoefficients {
    MetaKind kind = MetaKind::nonneg;
    Vector weights;           // per candidate (absent for rf/majority_vote)
    double intercept = 0.0;   // regression meta-learners
    Matrix class_weights;     // nonneg_logistic: K x (M*K), all >= 0
    Vector class_intercepts;  // nonneg_logistic: K
    std::optional<TrainedModel> model;  // rf meta-learner
    std::vector<std::string> candidate_ids;
    int n_classes = 0;

    bool operator==(const MetaCoefficients& o) const {
        return kind == o.kind && weights == o.weights && intercept == o.intercept &&
               class_weights == o.class_weights && class_intercepts == o.class_intercepts &&
               candidate_ids == o.candidate_ids && n_classes == o.n_classes;
    }
};

// ---- non-negative least squares (Lawson-Hanson active set) ----

struct NnlsResult {
    Vector x;
    int iterations = 0;
};

// min ||A x - b||^2 s.t. x >= 0. Iteration cap is 10 * n_cols.
NnlsResult nnls(const Matrix& A, const Vector& b);

// ---- Algorithm 1 steps ----

// Step 3: for each fold f and candidate m, train m on folds != f with
// fold-local standardization and predict fold f rows.
OofPredictions generate_oof(const std::vector<ModelSpec>& candidates, const Matrix& X,
                            const Targets& y, const IndexSet& train_rows,
                            const std::vector<IndexSet>& folds, int split_id,
                            std::uint64_t seed, int inner_folds = 10);

MetaCoefficients fit_meta_regression(const OofPredictions& oof, const Vector& y, MetaKind kind,
                                     std::uint64_t seed = 0);

MetaCoefficients fit_meta_classification(const OofPredictions& oof,
                                         const std::vector<int>& labels, MetaKind kind);

// Step 6: combine test-set candidate predictions with the meta-learner.
Prediction blend(const MetaCoefficients& meta, const std::vector<Prediction>& test_preds);

Prediction model_average(const std::vector<Prediction>& test_preds);

Prediction majority_vote(const std::vector<Prediction>& test_preds, int n_classes);

// Audit serialization: row_id, fold, <candidate columns...>.
std::string oof_to_csv(const OofPredictions& oof);

// ---- projected-gradient multinomial logistic (meta-learner) ----

struct NonnegLogisticOptions {
    double tol = 1e-6;  // projected-gradient norm
    int max_iters = 20000;
};

struct NonnegLogisticFit {
    Matrix weights;     // K x d, clamped >= 0
    Vector intercepts;  // K
    double objective = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Multinomial logistic with non-negative weights, mean NLL objective,
// projected gradient with backtracking line search.
NonnegLogisticFit fit_nonneg_logistic(const Matrix& features, const std::vector<int>& labels,
                                      int n_classes, const NonnegLogisticOptions& opts = {});

double multinomial_nll(const Matrix& features, const std::vector<int>& labels, int n_classes,
                       const Matrix& weights, const Vector& intercepts);

}  // namespace specstack
