#include "specstack/stacking.hpp"

#include "specstack/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace specstack {

std::string meta_kind_name(MetaKind k) {
    switch (k) {
        case MetaKind::nonneg: return "nonneg";
        case MetaKind::lasso: return "lasso";
        case MetaKind::lm: return "lm";
        case MetaKind::rf: return "rf";
        case MetaKind::nonneg_logistic: return "nonneg_logistic";
        case MetaKind::model_average: return "model_average";
        case MetaKind::majority_vote: return "majority_vote";
    }
    return "?";
}

MetaKind parse_meta_kind(const std::string& s) {
    if (s == "nonneg" || s == "ens_nonneg") return MetaKind::nonneg;
    if (s == "lasso" || s == "ens_lasso") return MetaKind::lasso;
    if (s == "lm" || s == "ens_lm") return MetaKind::lm;
    if (s == "rf" || s == "ens_rf") return MetaKind::rf;
    if (s == "nonneg_logistic") return MetaKind::nonneg_logistic;
    if (s == "model_average" || s == "ens_ma") return MetaKind::model_average;
    if (s == "majority_vote" || s == "ens_maj_vote") return MetaKind::majority_vote;
    throw ConfigError("unknown meta-learner: " + s);
}

OofPredictions generate_oof(const std::vector<ModelSpec>& candidates, const Matrix& X,
                            const Targets& y, const IndexSet& train_rows,
                            const std::vector<IndexSet>& folds, int split_id,
                            std::uint64_t seed, int inner_folds) {
    OofPredictions oof;
    oof.split_id = split_id;
    oof.row_ids = train_rows;
    oof.n_classes = y.task == Task::classification ? y.n_classes : 0;
    const int n = static_cast<int>(train_rows.size());
    const int block = y.task == Task::classification ? y.n_classes : 1;
    oof.values.resize(n, static_cast<int>(candidates.size()) * block);
    oof.fold_of_row.assign(static_cast<std::size_t>(n), -1);

    // Position of each training row inside the OOF matrix.
    std::map<int, int> pos;
    for (int i = 0; i < n; ++i) pos[train_rows[static_cast<std::size_t>(i)]] = i;
    for (std::size_t f = 0; f < folds.size(); ++f)
        for (int r : folds[f]) {
            auto it = pos.find(r);
            if (it == pos.end()) throw DataError("generate_oof: folds do not partition train rows");
            oof.fold_of_row[static_cast<std::size_t>(it->second)] = static_cast<int>(f);
        }
    for (int f : oof.fold_of_row)
        if (f < 0) throw DataError("generate_oof: folds do not cover all train rows");

    for (std::size_t m = 0; m < candidates.size(); ++m) {
        oof.candidate_ids.push_back(candidates[m].id);
        for (std::size_t f = 0; f < folds.size(); ++f) {
            IndexSet in_rows;
            for (std::size_t g = 0; g < folds.size(); ++g)
                if (g != f) in_rows.insert(in_rows.end(), folds[g].begin(), folds[g].end());
            std::sort(in_rows.begin(), in_rows.end());
            const IndexSet& out_rows = folds[f];

            try {
                // Fold-local standardization: statistics never see fold f.
                const Standardizer std_ = fit_standardizer(X, in_rows);
                Matrix x_out(out_rows.size(), X.cols());
                for (std::size_t i = 0; i < out_rows.size(); ++i)
                    x_out.row(static_cast<int>(i)) = X.row(out_rows[i]);

                Matrix x_in_std(in_rows.size(), X.cols());
                for (std::size_t i = 0; i < in_rows.size(); ++i)
                    x_in_std.row(static_cast<int>(i)) = X.row(in_rows[i]);
                x_in_std = apply_standardizer(std_, x_in_std);

                const Targets y_in = y.subset(in_rows);
                Hyperparams chosen;
                const std::uint64_t fold_seed =
                    derive_seed(seed, {static_cast<std::uint64_t>(split_id), m, f});
                if (candidates[m].grid.points.size() == 1) {
                    chosen = candidates[m].grid.points.front();
                } else {
                    const int k = std::min<int>(inner_folds, static_cast<int>(in_rows.size()));
                    IndexSet local(in_rows.size());
                    for (std::size_t i = 0; i < local.size(); ++i) local[i] = static_cast<int>(i);
                    const auto inner = make_kfold(
                        local, k, y.task == Task::classification ? &y_in.labels : nullptr,
                        derive_seed(fold_seed, {7}));
                    ModelSpec local_spec = candidates[m];
                    local_spec.seed = derive_seed(fold_seed, {11});
                    chosen = tune(local_spec, x_in_std, y_in, inner);
                }
                const TrainedModel model =
                    fit_model(candidates[m].kind, candidates[m].task, x_in_std, y_in, chosen,
                              derive_seed(fold_seed, {13}));
                const Prediction pred = predict(model, apply_standardizer(std_, x_out));

                for (std::size_t i = 0; i < out_rows.size(); ++i) {
                    const int row = pos.at(out_rows[i]);
                    if (y.task == Task::regression) {
                        oof.values(row, static_cast<int>(m)) = pred.values[static_cast<Eigen::Index>(i)];
                    } else {
                        oof.values.block(row, static_cast<int>(m) * block, 1, block) =
                            pred.probs.row(static_cast<int>(i));
                    }
                }
            } catch (const Error& e) {
                throw NumericError("generate_oof: candidate '" + candidates[m].id +
                                   "' failed on fold " + std::to_string(f) + ": " + e.what());
            }
        }
    }
    return oof;
}

namespace {

Matrix centered_columns(const Matrix& A, Eigen::RowVectorXd& means) {
    means = A.colwise().mean();
    return A.rowwise() - means;
}

}  // namespace

MetaCoefficients fit_meta_regression(const OofPredictions& oof, const Vector& y, MetaKind kind,
                                     std::uint64_t seed) {
    if (oof.values.rows() != y.size())
        throw DataError("fit_meta_regression: OOF rows do not match response length");
    MetaCoefficients meta;
    meta.kind = kind;
    meta.candidate_ids = oof.candidate_ids;
    const int m = oof.n_candidates();

    switch (kind) {
        case MetaKind::nonneg: {
            // Intercept profiled out by centering; constraint stays on slopes.
            Eigen::RowVectorXd pm;
            const Matrix pc = centered_columns(oof.values, pm);
            const Vector yc = y.array() - y.mean();
            meta.weights = nnls(pc, yc).x;
            meta.intercept = y.mean() - pm.dot(meta.weights);
            break;
        }
        case MetaKind::lm: {
            Matrix design(oof.values.rows(), m + 1);
            design.col(0).setOnes();
            design.rightCols(m) = oof.values;
            const Vector beta = design.colPivHouseholderQr().solve(y);
            meta.intercept = beta[0];
            meta.weights = beta.tail(m);
            break;
        }
        case MetaKind::lasso: {
            // Lambda chosen by 5-fold CV on the OOF matrix itself.
            const std::vector<double> lambdas{0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002,
                                              0.001, 0.0005, 0.0001};
            const int n = static_cast<int>(oof.values.rows());
            IndexSet all(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
            const auto folds = make_kfold(all, std::min(5, n), nullptr, derive_seed(seed, {23}));
            Vector cv_err = Vector::Zero(static_cast<Eigen::Index>(lambdas.size()));
            for (const auto& fold : folds) {
                IndexSet in_rows;
                for (int i = 0; i < n; ++i)
                    if (std::find(fold.begin(), fold.end(), i) == fold.end()) in_rows.push_back(i);
                Matrix x_in(in_rows.size(), m);
                Vector y_in(in_rows.size());
                for (std::size_t i = 0; i < in_rows.size(); ++i) {
                    x_in.row(static_cast<int>(i)) = oof.values.row(in_rows[i]);
                    y_in[static_cast<Eigen::Index>(i)] = y[in_rows[i]];
                }
                std::vector<double> icpts;
                const auto betas = enet_path(x_in, y_in, 1.0, lambdas, &icpts);
                for (std::size_t li = 0; li < lambdas.size(); ++li)
                    for (int r : fold) {
                        const double res = y[r] - icpts[li] - oof.values.row(r).dot(betas[li]);
                        cv_err[static_cast<Eigen::Index>(li)] += res * res;
                    }
            }
            int best = 0;
            for (Eigen::Index i = 1; i < cv_err.size(); ++i)
                if (cv_err[i] < cv_err[best]) best = static_cast<int>(i);
            // Ties toward larger lambda (simpler): scan order already favors it.
            for (Eigen::Index i = 0; i < cv_err.size(); ++i)
                if (lambdas[static_cast<std::size_t>(i)] > lambdas[static_cast<std::size_t>(best)] &&
                    cv_err[i] <= cv_err[best] + 1e-12 * std::max(1.0, cv_err[best]))
                    best = static_cast<int>(i);
            Targets t;
            t.task = Task::regression;
            t.y = y;
            const TrainedModel fit = fit_enet(oof.values, t, 1.0, lambdas[static_cast<std::size_t>(best)]);
            const auto& em = std::get<EnetModel>(fit.fitted);
            meta.weights = em.coef;
            meta.intercept = em.intercept;
            break;
        }
        case MetaKind::rf: {
            Targets t;
            t.task = Task::regression;
            t.y = y;
            RfParams rp;
            rp.ntrees = 500;
            rp.min_node = 5;
            rp.seed = derive_seed(seed, {29});
            meta.model = fit_rf(oof.values, t, rp);
            break;
        }
        case MetaKind::model_average:
            meta.weights = Vector::Constant(m, 1.0 / m);
            meta.intercept = 0.0;
            break;
        default:
            throw ConfigError("fit_meta_regression: unsupported kind " + meta_kind_name(kind));
    }
    return meta;
}

MetaCoefficients fit_meta_classification(const OofPredictions& oof,
                                         const std::vector<int>& labels, MetaKind kind) {
    if (kind != MetaKind::nonneg_logistic)
        throw ConfigError("fit_meta_classification: unsupported kind " + meta_kind_name(kind));
    if (oof.n_classes < 2) throw DataError("fit_meta_classification: OOF has no class blocks");
    if (oof.values.rows() != static_cast<Eigen::Index>(labels.size()))
        throw DataError("fit_meta_classification: label length mismatch");

    MetaCoefficients meta;
    meta.kind = kind;
    meta.candidate_ids = oof.candidate_ids;
    meta.n_classes = oof.n_classes;
    const NonnegLogisticFit fit = fit_nonneg_logistic(oof.values, labels, oof.n_classes);
    if (!fit.converged)
        throw NumericError("fit_meta_classification: projected gradient did not converge; "
                           "final gradient norm " + fmt_double(fit.grad_norm, 6));
    meta.class_weights = fit.weights;
    meta.class_intercepts = fit.intercepts;
    return meta;
}

Prediction blend(const MetaCoefficients& meta, const std::vector<Prediction>& test_preds) {
    if (test_preds.empty()) throw DataError("blend: empty candidate set");
    Prediction out;

    if (meta.kind == MetaKind::nonneg_logistic) {
        if (static_cast<int>(test_preds.size()) != static_cast<int>(meta.candidate_ids.size()))
            throw DataError("blend: candidate set mismatch");
        const int n = static_cast<int>(test_preds.front().probs.rows());
        const int K = meta.n_classes;
        Matrix features(n, static_cast<int>(test_preds.size()) * K);
        for (std::size_t m = 0; m < test_preds.size(); ++m) {
            if (test_preds[m].probs.rows() != n || test_preds[m].probs.cols() != K)
                throw DataError("blend: candidate probability block mismatch");
            features.block(0, static_cast<int>(m) * K, n, K) = test_preds[m].probs;
        }
        Matrix eta = (features * meta.class_weights.transpose()).rowwise() +
                     meta.class_intercepts.transpose();
        out.probs.resize(n, K);
        for (int i = 0; i < n; ++i) {
            const double mx = eta.row(i).maxCoeff();
            out.probs.row(i) = (eta.row(i).array() - mx).exp();
        }
        renormalize_rows(out.probs);
        out.labels = argmax_labels(out.probs);
        return out;
    }

    if (meta.kind == MetaKind::rf) {
        const int n = static_cast<int>(test_preds.front().values.size());
        Matrix features(n, static_cast<int>(test_preds.size()));
        for (std::size_t m = 0; m < test_preds.size(); ++m) {
            if (test_preds[m].values.size() != n) throw DataError("blend: prediction length mismatch");
            features.col(static_cast<int>(m)) = test_preds[m].values;
        }
        if (!meta.model) throw DataError("blend: rf meta-learner has no fitted model");
        return predict(*meta.model, features);
    }

    // Linear kinds: intercept + sum_m w_m p_m.
    if (static_cast<int>(test_preds.size()) != meta.weights.size())
        throw DataError("blend: candidate set mismatch");
    const int n = static_cast<int>(test_preds.front().values.size());
    out.values = Vector::Constant(n, meta.intercept);
    for (std::size_t m = 0; m < test_preds.size(); ++m) {
        if (test_preds[m].values.size() != n) throw DataError("blend: prediction length mismatch");
        out.values += meta.weights[static_cast<Eigen::Index>(m)] * test_preds[m].values;
    }
    return out;
}

Prediction model_average(const std::vector<Prediction>& test_preds) {
    if (test_preds.empty()) throw DataError("model_average: empty candidate set");
    Prediction out;
    const int n = static_cast<int>(test_preds.front().values.size());
    out.values = Vector::Zero(n);
    for (const auto& p : test_preds) {
        if (p.values.size() != n) throw DataError("model_average: prediction length mismatch");
        out.values += p.values;
    }
    out.values /= static_cast<double>(test_preds.size());
    return out;
}

Prediction majority_vote(const std::vector<Prediction>& test_preds, int n_classes) {
    if (test_preds.empty()) throw DataError("majority_vote: empty candidate set");
    const int n = static_cast<int>(test_preds.front().labels.size());
    for (const auto& p : test_preds) {
        if (static_cast<int>(p.labels.size()) != n || p.probs.cols() != n_classes)
            throw DataError("majority_vote: class-set mismatch across candidates");
    }
    Prediction out;
    out.probs = Matrix::Zero(n, n_classes);
    out.labels.resize(static_cast<std::size_t>(n));
    const auto M = static_cast<double>(test_preds.size());
    for (int i = 0; i < n; ++i) {
        std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
        Eigen::RowVectorXd mean_prob = Eigen::RowVectorXd::Zero(n_classes);
        for (const auto& p : test_preds) {
            ++votes[static_cast<std::size_t>(p.labels[static_cast<std::size_t>(i)])];
            mean_prob += p.probs.row(i);
        }
        mean_prob /= M;
        int best = 0;
        for (int k = 1; k < n_classes; ++k) {
            if (votes[static_cast<std::size_t>(k)] > votes[static_cast<std::size_t>(best)])
                best = k;
            else if (votes[static_cast<std::size_t>(k)] == votes[static_cast<std::size_t>(best)] &&
                     mean_prob[k] > mean_prob[best])
                best = k;
        }
        out.labels[static_cast<std::size_t>(i)] = best;
        // Vote-share probabilities keep downstream invariants intact.
        for (int k = 0; k < n_classes; ++k)
            out.probs(i, k) = votes[static_cast<std::size_t>(k)] / M;
    }
    return out;
}

std::string oof_to_csv(const OofPredictions& oof) {
    std::ostringstream out;
    out << "row_id,fold";
    const int block = oof.n_classes > 0 ? oof.n_classes : 1;
    for (const auto& id : oof.candidate_ids) {
        if (block == 1) {
            out << ',' << id;
        } else {
            for (int k = 0; k < block; ++k) out << ',' << id << "_c" << k;
        }
    }
    out << '\n';
    for (Eigen::Index i = 0; i < oof.values.rows(); ++i) {
        out << oof.row_ids[static_cast<std::size_t>(i)] << ','
            << oof.fold_of_row[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < oof.values.cols(); ++j)
            out << ',' << fmt_double(oof.values(i, j));
        out << '\n';
    }
    return out.str();
}

NonnegLogisticFit fit_nonneg_logistic(const Matrix& features, const std::vector<int>& labels,
                                      int n_classes, const NonnegLogisticOptions& opts) {
    const int n = static_cast<int>(features.rows());
    const int d = static_cast<int>(features.cols());
    if (static_cast<int>(labels.size()) != n)
        throw DataError("fit_nonneg_logistic: label length mismatch");

    NonnegLogisticFit fit;
    fit.weights = Matrix::Zero(n_classes, d);
    fit.intercepts = Vector::Zero(n_classes);

    auto objective = [&](const Matrix& W, const Vector& b) {
        return multinomial_nll(features, labels, n_classes, W, b);
    };

    double obj = objective(fit.weights, fit.intercepts);
    double step = 1.0;
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        // Gradient of the mean NLL.
        Matrix eta = (features * fit.weights.transpose()).rowwise() + fit.intercepts.transpose();
        Matrix prob(n, n_classes);
        for (int i = 0; i < n; ++i) {
            const double mx = eta.row(i).maxCoeff();
            prob.row(i) = (eta.row(i).array() - mx).exp();
            prob.row(i) /= prob.row(i).sum();
        }
        for (int i = 0; i < n; ++i) prob(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
        const Matrix grad_w = prob.transpose() * features / n;
        const Vector grad_b = prob.colwise().sum().transpose() / n;

        // Backtracking line search on the projected step.
        Matrix w_new;
        Vector b_new;
        double obj_new = obj;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            w_new = (fit.weights - step * grad_w).cwiseMax(0.0);
            b_new = fit.intercepts - step * grad_b;
            obj_new = objective(w_new, b_new);
            if (obj_new <= obj + 1e-12) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            fit.grad_norm = std::numeric_limits<double>::infinity();
            break;
        }

        // Projected-gradient norm: free directions plus active-bound
        // violations only.
        double g2 = grad_b.squaredNorm();
        for (int k = 0; k < n_classes; ++k)
            for (int j = 0; j < d; ++j) {
                const double g = grad_w(k, j);
                if (w_new(k, j) > 0 || g < 0) g2 += g * g;
            }
        fit.grad_norm = std::sqrt(g2);
        fit.weights = w_new;
        fit.intercepts = b_new;
        obj = obj_new;
        fit.iterations = iter + 1;
        if (fit.grad_norm < opts.tol) {
            fit.converged = true;
            break;
        }
        step = std::min(step * 2.0, 1e4);  // allow recovery after backtracks
    }
    fit.objective = obj;
    return fit;
}

double multinomial_nll(const Matrix& features, const std::vector<int>& labels, int n_classes,
                       const Matrix& weights, const Vector& intercepts) {
    (void)n_classes;
    const int n = static_cast<int>(features.rows());
    Matrix eta = (features * weights.transpose()).rowwise() + intercepts.transpose();
    double nll = 0;
    for (int i = 0; i < n; ++i) {
        const double mx = eta.row(i).maxCoeff();
        const double lse = mx + std::log((eta.row(i).array() - mx).exp().sum());
        nll += lse - eta(i, labels[static_cast<std::size_t>(i)]);
    }
    return nll / n;
}

}  // namespace specstack
