#include "specstack/models.hpp"

#include <cmath>

namespace specstack {

TrainedModel fit_rf(const Matrix& X, const Targets& y, const RfParams& params) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (params.ntrees < 1) throw ConfigError("rf: ntrees must be >= 1");
    if (params.mtry < 0 || params.mtry > p) throw ConfigError("rf: mtry outside [0, p]");
    if (y.size() != n) throw DataError("rf: target length mismatch");

    const bool classification = y.task == Task::classification;
    int mtry = params.mtry;
    if (mtry == 0)
        mtry = classification ? std::max(1, static_cast<int>(std::floor(std::sqrt(p))))
                              : std::max(1, p / 3);

    RfModel m;
    m.n_classes = y.n_classes;
    if (!classification) {
        m.constant_target = true;
        for (int i = 1; i < n; ++i)
            if (y.y[i] != y.y[0]) {
                m.constant_target = false;
                break;
            }
    }

    TreeParams tp;
    tp.min_node = params.min_node;
    tp.mtry = mtry;
    tp.classification = classification;
    tp.n_classes = y.n_classes;

    m.trees.resize(static_cast<std::size_t>(params.ntrees));
    for (int t = 0; t < params.ntrees; ++t) {
        Rng rng(derive_seed(params.seed, {static_cast<std::uint64_t>(t)}));
        std::vector<int> rows;
        rows.reserve(static_cast<std::size_t>(n));
        if (params.bootstrap) {
            for (int i = 0; i < n; ++i) rows.push_back(rng.next_int(n));
        } else {
            for (int i = 0; i < n; ++i) rows.push_back(i);
        }
        m.trees[static_cast<std::size_t>(t)] = build_tree(X, y.y, y.labels, rows, tp, rng);
    }

    TrainedModel tm;
    tm.kind = ModelKind::rf;
    tm.task = y.task;
    tm.params["ntrees"] = params.ntrees;
    tm.params["mtry"] = mtry;
    tm.params["min_node"] = params.min_node;
    tm.n_features = p;
    tm.fitted = std::move(m);
    return tm;
}

TrainedModel fit_gbm(const Matrix& X, const Vector& y, const GbmParams& params) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (params.ntrees < 0) throw ConfigError("gbm: ntrees must be >= 0");
    if (params.depth < 1) throw ConfigError("gbm: depth must be >= 1");
    if (params.shrinkage <= 0 || params.shrinkage > 1)
        throw ConfigError("gbm: shrinkage must be in (0,1]");
    if (y.size() != n) throw DataError("gbm: target length mismatch");

    GbmModel m;
    m.f0 = y.mean();
    m.shrinkage = params.shrinkage;

    TreeParams tp;
    tp.max_depth = params.depth;
    tp.min_node = params.min_node;

    Vector f = Vector::Constant(n, m.f0);
    std::vector<int> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    std::vector<int> no_labels;

    for (int t = 0; t < params.ntrees; ++t) {
        const Vector resid = y - f;
        Rng rng(derive_seed(params.seed, {static_cast<std::uint64_t>(t)}));
        Tree tree = build_tree(X, resid, no_labels, rows, tp, rng);
        for (int i = 0; i < n; ++i)
            f[i] += params.shrinkage * tree.predict_value(X.row(i));
        m.trees.push_back(std::move(tree));
    }

    TrainedModel tm;
    tm.kind = ModelKind::gbm;
    tm.task = Task::regression;
    tm.params["ntrees"] = params.ntrees;
    tm.params["depth"] = params.depth;
    tm.params["shrinkage"] = params.shrinkage;
    tm.n_features = p;
    tm.fitted = std::move(m);
    return tm;
}

}  // namespace specstack
