#include "specstack/models.hpp"

#include "specstack/cv_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace specstack {

std::string kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::pls: return "pls";
        case ModelKind::pca_lm: return "pca_lm";
        case ModelKind::lda: return "lda";
        case ModelKind::enet: return "enet";
        case ModelKind::rf: return "rf";
        case ModelKind::gbm: return "gbm";
    }
    return "?";
}

ModelKind parse_kind(const std::string& s) {
    if (s == "pls") return ModelKind::pls;
    if (s == "pca_lm") return ModelKind::pca_lm;
    if (s == "lda") return ModelKind::lda;
    if (s == "enet" || s == "lasso") return ModelKind::enet;
    if (s == "rf") return ModelKind::rf;
    if (s == "gbm") return ModelKind::gbm;
    throw ConfigError("unknown model kind: " + s);
}

Targets Targets::subset(const IndexSet& rows) const {
    Targets out;
    out.task = task;
    out.n_classes = n_classes;
    if (task == Task::regression) {
        out.y.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) out.y[static_cast<Eigen::Index>(i)] = y[rows[i]];
    } else {
        for (int r : rows) out.labels.push_back(labels[static_cast<std::size_t>(r)]);
    }
    return out;
}

namespace {

double param(const Hyperparams& h, const std::string& key, double fallback) {
    auto it = h.find(key);
    return it == h.end() ? fallback : it->second;
}

int iparam(const Hyperparams& h, const std::string& key, int fallback) {
    return static_cast<int>(param(h, key, fallback));
}

}  // namespace

TrainedModel fit_model(ModelKind kind, Task task, const Matrix& X, const Targets& y,
                       const Hyperparams& params, std::uint64_t seed) {
    switch (kind) {
        case ModelKind::pls:
            return fit_pls(X, y, iparam(params, "ncomp", 2));
        case ModelKind::pca_lm:
            if (task != Task::regression)
                throw ConfigError("pca_lm supports regression only");
            return fit_pca_lm(X, y.y, iparam(params, "ncomp", 2));
        case ModelKind::lda:
            if (task != Task::classification)
                throw ConfigError("lda supports classification only");
            return fit_lda(X, y.labels, y.n_classes);
        case ModelKind::enet:
            return fit_enet(X, y, param(params, "alpha", 1.0), param(params, "lambda", 0.01));
        case ModelKind::rf: {
            RfParams rp;
            rp.ntrees = iparam(params, "ntrees", rp.ntrees);
            rp.mtry = iparam(params, "mtry", 0);
            rp.min_node = iparam(params, "min_node", rp.min_node);
            rp.seed = seed;
            return fit_rf(X, y, rp);
        }
        case ModelKind::gbm: {
            if (task != Task::regression) throw ConfigError("gbm supports regression only");
            GbmParams gp;
            gp.ntrees = iparam(params, "ntrees", gp.ntrees);
            gp.depth = iparam(params, "depth", gp.depth);
            gp.shrinkage = param(params, "shrinkage", gp.shrinkage);
            gp.min_node = iparam(params, "min_node", gp.min_node);
            gp.seed = seed;
            return fit_gbm(X, y.y, gp);
        }
    }
    throw ConfigError("unknown model kind");
}

Prediction predict(const TrainedModel& model, const Matrix& X) {
    if (static_cast<int>(X.cols()) != model.n_features)
        throw DataError("predict: expected " + std::to_string(model.n_features) +
                        " features, got " + std::to_string(X.cols()));
    const int n = static_cast<int>(X.rows());
    Prediction pred;

    if (const auto* m = std::get_if<PlsModel>(&model.fitted)) {
        const Matrix scores =
            ((X.rowwise() - m->x_mean.transpose()) * m->coef).rowwise() + m->y_mean.transpose();
        if (model.task == Task::regression) {
            pred.values = scores.col(0);
        } else {
            pred.probs = scores;
            renormalize_rows(pred.probs);
            pred.labels = argmax_labels(pred.probs);
        }
    } else if (const auto* m = std::get_if<PcaLmModel>(&model.fitted)) {
        const Matrix s = (X.rowwise() - m->x_mean.transpose()) * m->projection;
        pred.values = (s * m->coef).array() + m->intercept;
    } else if (const auto* m = std::get_if<LdaModel>(&model.fitted)) {
        Matrix delta = (X * m->linear.transpose()).rowwise() + m->offsets.transpose();
        pred.labels = argmax_labels(delta);
        // Gaussian posterior via softmax of the discriminant scores.
        pred.probs.resize(n, delta.cols());
        for (int i = 0; i < n; ++i) {
            const double mx = delta.row(i).maxCoeff();
            pred.probs.row(i) = (delta.row(i).array() - mx).exp();
            pred.probs.row(i) /= pred.probs.row(i).sum();
        }
    } else if (const auto* m = std::get_if<EnetModel>(&model.fitted)) {
        if (model.task == Task::regression) {
            pred.values = (X * m->coef).array() + m->intercept;
        } else {
            Matrix eta = (X * m->class_coef.transpose()).rowwise() + m->class_intercept.transpose();
            pred.probs.resize(n, eta.cols());
            for (int i = 0; i < n; ++i) {
                const double mx = eta.row(i).maxCoeff();
                pred.probs.row(i) = (eta.row(i).array() - mx).exp();
                pred.probs.row(i) /= pred.probs.row(i).sum();
            }
            pred.labels = argmax_labels(pred.probs);
        }
    } else if (const auto* m = std::get_if<RfModel>(&model.fitted)) {
        if (model.task == Task::regression) {
            pred.values = Vector::Zero(n);
            for (const auto& tree : m->trees)
                for (int i = 0; i < n; ++i) pred.values[i] += tree.predict_value(X.row(i));
            pred.values /= static_cast<double>(m->trees.size());
        } else {
            pred.probs = Matrix::Zero(n, m->n_classes);
            for (const auto& tree : m->trees)
                for (int i = 0; i < n; ++i) pred.probs(i, tree.predict_label(X.row(i))) += 1.0;
            pred.probs /= static_cast<double>(m->trees.size());
            pred.labels = argmax_labels(pred.probs);
        }
    } else if (const auto* m = std::get_if<GbmModel>(&model.fitted)) {
        pred.values = Vector::Constant(n, m->f0);
        for (const auto& tree : m->trees)
            for (int i = 0; i < n; ++i) pred.values[i] += m->shrinkage * tree.predict_value(X.row(i));
    }
    return pred;
}

std::vector<double> complexity_key(const Hyperparams& params) {
    // Simpler-model ordering: fewer components, then larger lambda, then
    // fewer trees; remaining keys only break exact ties deterministically.
    return {param(params, "ncomp", 0), -param(params, "lambda", 0),
            param(params, "ntrees", 0), param(params, "depth", 0),
            param(params, "mtry", 0), param(params, "min_node", 0),
            param(params, "alpha", 0), param(params, "shrinkage", 0)};
}

Hyperparams tune(const ModelSpec& spec, const Matrix& X, const Targets& y,
                 const std::vector<IndexSet>& fold_rows) {
    if (spec.grid.points.empty()) throw ConfigError("tune: empty grid for " + spec.id);
    if (spec.grid.points.size() == 1) return spec.grid.points.front();

    const bool regression = spec.task == Task::regression;
    double best_score = regression ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
    const Hyperparams* best = nullptr;
    bool any_ok = false;

    for (const auto& point : spec.grid.points) {
        double score_sum = 0;
        bool failed = false;
        for (std::size_t f = 0; f < fold_rows.size() && !failed; ++f) {
            IndexSet in_rows;
            for (std::size_t g = 0; g < fold_rows.size(); ++g)
                if (g != f) in_rows.insert(in_rows.end(), fold_rows[g].begin(), fold_rows[g].end());
            std::sort(in_rows.begin(), in_rows.end());
            const IndexSet& out_rows = fold_rows[f];
            try {
                const Standardizer std_ = fit_standardizer(X, in_rows);
                Matrix x_in(in_rows.size(), X.cols());
                for (std::size_t i = 0; i < in_rows.size(); ++i) x_in.row(static_cast<int>(i)) = X.row(in_rows[i]);
                Matrix x_out(out_rows.size(), X.cols());
                for (std::size_t i = 0; i < out_rows.size(); ++i) x_out.row(static_cast<int>(i)) = X.row(out_rows[i]);
                const TrainedModel model =
                    fit_model(spec.kind, spec.task, apply_standardizer(std_, x_in),
                              y.subset(in_rows), point,
                              derive_seed(spec.seed, {31, f}));
                const Prediction pred = predict(model, apply_standardizer(std_, x_out));
                const Targets truth = y.subset(out_rows);
                score_sum += regression ? metric_rmse(pred.values, truth.y)
                                        : metric_accuracy(pred.labels, truth.labels);
            } catch (const Error&) {
                failed = true;  // disqualifies this grid point
            }
        }
        if (failed) continue;
        any_ok = true;
        const double score = score_sum / static_cast<double>(fold_rows.size());
        const bool better = regression ? score < best_score : score > best_score;
        const double tie_tol = 1e-12 * std::max({1.0, std::abs(score), std::abs(best_score)});
        const bool tied = std::abs(score - best_score) <= tie_tol;
        if (!best || (better && !tied)) {
            best_score = score;
            best = &point;
        } else if (tied && complexity_key(point) < complexity_key(*best)) {
            best = &point;
        }
    }
    if (!any_ok) throw NumericError("tune: every grid point failed for " + spec.id);
    return *best;
}

TuningGrid expand_grid(const std::map<std::string, std::vector<double>>& values) {
    TuningGrid grid;
    grid.points.push_back({});
    for (const auto& [name, list] : values) {
        if (list.empty()) throw ConfigError("tuning grid: empty value list for " + name);
        std::vector<Hyperparams> next;
        for (const auto& point : grid.points)
            for (double v : list) {
                Hyperparams h = point;
                h[name] = v;
                next.push_back(std::move(h));
            }
        grid.points = std::move(next);
    }
    return grid;
}

TuningGrid default_grid(ModelKind kind, Task task, int n, int p) {
    std::map<std::string, std::vector<double>> g;
    switch (kind) {
        case ModelKind::pls:
        case ModelKind::pca_lm: {
            const int maxc = std::max(1, std::min({10, n - 1, p}));
            std::vector<double> ncomp;
            for (int c = 1; c <= maxc; ++c) ncomp.push_back(c);
            g["ncomp"] = ncomp;
            break;
        }
        case ModelKind::lda:
            break;  // no hyperparameters
        case ModelKind::enet:
            g["alpha"] = {0.5, 1.0};
            g["lambda"] = {0.001, 0.01, 0.1};
            break;
        case ModelKind::rf:
            g["ntrees"] = {500};
            g["mtry"] = {0};
            g["min_node"] = {5};
            break;
        case ModelKind::gbm:
            g["ntrees"] = {200};
            g["depth"] = {3};
            g["shrinkage"] = {0.1};
            break;
    }
    (void)task;
    return expand_grid(g);
}

void validate_grid(ModelKind kind, Task task, const TuningGrid& grid) {
    if (grid.points.empty()) throw ConfigError("tuning grid is empty");
    if ((kind == ModelKind::pca_lm || kind == ModelKind::gbm) && task != Task::regression)
        throw ConfigError(kind_name(kind) + " is regression-only");
    if (kind == ModelKind::lda && task != Task::classification)
        throw ConfigError("lda is classification-only");
    for (const auto& point : grid.points)
        for (const auto& [name, v] : point) {
            if (name == "alpha" && (v < 0 || v > 1))
                throw ConfigError("grid: alpha must be in [0,1]");
            if (name == "lambda" && v < 0) throw ConfigError("grid: lambda must be >= 0");
            if (name == "shrinkage" && (v <= 0 || v > 1))
                throw ConfigError("grid: shrinkage must be in (0,1]");
            if (name == "ncomp" && v < 1) throw ConfigError("grid: ncomp must be >= 1");
            if (name == "ntrees" && v < (kind == ModelKind::gbm ? 0 : 1))
                throw ConfigError("grid: ntrees out of range");
            if (name == "depth" && v < 1) throw ConfigError("grid: depth must be >= 1");
            if (name == "min_node" && v < 1) throw ConfigError("grid: min_node must be >= 1");
            if (name == "mtry" && v < 0) throw ConfigError("grid: mtry must be >= 0");
        }
}

}  // namespace specstack
