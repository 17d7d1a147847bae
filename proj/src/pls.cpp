#include "specstack/models.hpp"

#include <cmath>

namespace specstack {

namespace {

Matrix one_hot(const std::vector<int>& labels, int n_classes) {
    Matrix Y = Matrix::Zero(static_cast<int>(labels.size()), n_classes);
    for (std::size_t i = 0; i < labels.size(); ++i)
        Y(static_cast<int>(i), labels[i]) = 1.0;
    return Y;
}

}  // namespace

TrainedModel fit_pls(const Matrix& X, const Targets& y, int ncomp) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    const int max_comp = std::min(n - 1, p);
    if (ncomp < 1 || ncomp > max_comp)
        throw ConfigError("pls: ncomp " + std::to_string(ncomp) + " outside [1, " +
                          std::to_string(max_comp) + "]");

    if (y.task == Task::classification && y.n_classes < 2)
        throw DataError("pls: classification needs at least 2 classes");
    Matrix Y = y.task == Task::regression ? Matrix(y.y) : one_hot(y.labels, y.n_classes);
    if (Y.rows() != n) throw DataError("pls: target length mismatch");
    const int q = static_cast<int>(Y.cols());

    PlsModel m;
    m.x_mean = X.colwise().mean();
    m.y_mean = Y.colwise().mean();

    Matrix Xd = X.rowwise() - m.x_mean.transpose();
    Matrix Yd = Y.rowwise() - m.y_mean.transpose();

    if (y.task == Task::regression && Yd.norm() < 1e-14)
        throw DataError("pls: zero-variance response");

    m.weights.resize(p, ncomp);
    m.x_loadings.resize(p, ncomp);
    m.y_loadings.resize(q, ncomp);
    m.train_scores.resize(n, ncomp);

    int extracted = 0;
    for (int a = 0; a < ncomp; ++a) {
        // NIPALS inner loop; for a single response column it converges in
        // one pass.
        Vector u = Yd.col(0);
        for (int j = 1; j < q; ++j)
            if (Yd.col(j).squaredNorm() > u.squaredNorm()) u = Yd.col(j);
        if (u.norm() < 1e-14) break;

        Vector w(p), c(q);
        Vector t = Vector::Zero(n);
        for (int iter = 0; iter < 500; ++iter) {
            w = Xd.transpose() * u;
            const double wn = w.norm();
            if (wn < 1e-14) break;
            w /= wn;
            Vector t_new = Xd * w;
            c = Yd.transpose() * t_new;
            const double cn = c.norm();
            if (cn < 1e-14) {
                t = t_new;
                break;
            }
            c /= cn;
            Vector u_new = Yd * c;
            const double delta = (t_new - t).norm();
            t = t_new;
            u = u_new;
            if (q == 1 || delta < 1e-12 * std::max(1.0, t.norm())) break;
        }
        const double tt = t.squaredNorm();
        if (tt < 1e-14 || w.norm() < 1e-14) break;

        Vector pl = Xd.transpose() * t / tt;
        Vector ql = Yd.transpose() * t / tt;
        Xd.noalias() -= t * pl.transpose();
        Yd.noalias() -= t * ql.transpose();

        m.weights.col(a) = w;
        m.x_loadings.col(a) = pl;
        m.y_loadings.col(a) = ql;
        m.train_scores.col(a) = t;
        ++extracted;
    }
    if (extracted == 0) throw NumericError("pls: no component could be extracted");
    if (extracted < ncomp) {
        m.weights.conservativeResize(Eigen::NoChange, extracted);
        m.x_loadings.conservativeResize(Eigen::NoChange, extracted);
        m.y_loadings.conservativeResize(Eigen::NoChange, extracted);
        m.train_scores.conservativeResize(Eigen::NoChange, extracted);
    }
    m.ncomp = extracted;

    // B = W (P'W)^-1 Q'
    const Matrix pw = m.x_loadings.transpose() * m.weights;
    m.coef = m.weights * pw.fullPivLu().solve(m.y_loadings.transpose());

    TrainedModel tm;
    tm.kind = ModelKind::pls;
    tm.task = y.task;
    tm.params["ncomp"] = ncomp;
    tm.n_features = p;
    tm.fitted = std::move(m);
    return tm;
}

TrainedModel fit_pca_lm(const Matrix& X, const Vector& y, int ncomp) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (ncomp < 1 || ncomp > std::min(n - 1, p))
        throw ConfigError("pca_lm: ncomp " + std::to_string(ncomp) + " outside [1, " +
                          std::to_string(std::min(n - 1, p)) + "]");
    if (y.size() != n) throw DataError("pca_lm: target length mismatch");

    PcaLmModel m;
    m.x_mean = X.colwise().mean();
    const Matrix Xc = X.rowwise() - m.x_mean.transpose();

    Eigen::BDCSVD<Matrix> svd(Xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double tol = std::max(n, p) * 2.22e-16 * (sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    if (ncomp > rank)
        throw ConfigError("pca_lm: ncomp " + std::to_string(ncomp) + " exceeds rank " +
                          std::to_string(rank));

    m.projection = svd.matrixV().leftCols(ncomp);
    const Matrix scores = Xc * m.projection;  // = U*S on the retained columns

    // Scores are orthogonal and centered, so the least squares split into
    // per-column ratios plus the response mean.
    m.intercept = y.mean();
    m.coef.resize(ncomp);
    for (int k = 0; k < ncomp; ++k) {
        const double ss = scores.col(k).squaredNorm();
        m.coef[k] = scores.col(k).dot(y) / ss;
    }

    TrainedModel tm;
    tm.kind = ModelKind::pca_lm;
    tm.task = Task::regression;
    tm.params["ncomp"] = ncomp;
    tm.n_features = p;
    tm.fitted = std::move(m);
    return tm;
}

}  // namespace specstack
