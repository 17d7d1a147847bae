#include "specstack/models.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace specstack {

TrainedModel fit_lda(const Matrix& X, const std::vector<int>& labels, int n_classes) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (n_classes < 2) throw DataError("lda: need at least 2 classes");
    if (static_cast<int>(labels.size()) != n) throw DataError("lda: label length mismatch");
    if (n <= n_classes) throw DataError("lda: need more samples than classes");

    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int l : labels) {
        if (l < 0 || l >= n_classes) throw DataError("lda: label outside class set");
        ++counts[static_cast<std::size_t>(l)];
    }
    for (int k = 0; k < n_classes; ++k)
        if (counts[static_cast<std::size_t>(k)] < 1)
            throw DataError("lda: class " + std::to_string(k) + " has no samples");

    LdaModel m;
    m.class_means = Matrix::Zero(n_classes, p);
    for (int i = 0; i < n; ++i) m.class_means.row(labels[static_cast<std::size_t>(i)]) += X.row(i);
    for (int k = 0; k < n_classes; ++k)
        m.class_means.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);

    Matrix sw = Matrix::Zero(p, p);
    for (int i = 0; i < n; ++i) {
        const Eigen::RowVectorXd d = X.row(i) - m.class_means.row(labels[static_cast<std::size_t>(i)]);
        sw.noalias() += d.transpose() * d;
    }
    sw /= static_cast<double>(n - n_classes);

    // Ridge guard: spectra often have p close to or above n.
    const double ridge = 1e-8 * sw.trace() / static_cast<double>(p);
    m.pooled_cov = sw + ridge * Matrix::Identity(p, p);

    Eigen::LLT<Matrix> llt(m.pooled_cov);
    if (llt.info() != Eigen::Success)
        throw NumericError("lda: pooled covariance not positive definite");

    m.log_priors.resize(n_classes);
    m.linear.resize(n_classes, p);
    m.offsets.resize(n_classes);
    for (int k = 0; k < n_classes; ++k) {
        m.log_priors[k] = std::log(static_cast<double>(counts[static_cast<std::size_t>(k)]) / n);
        const Vector mu = m.class_means.row(k).transpose();
        const Vector a = llt.solve(mu);
        m.linear.row(k) = a.transpose();
        m.offsets[k] = -0.5 * mu.dot(a) + m.log_priors[k];
    }

    // Discriminant directions: whiten the between-class scatter by the
    // pooled covariance and take the leading eigenvectors.
    m.grand_mean = X.colwise().mean();
    Matrix sb = Matrix::Zero(p, p);
    for (int k = 0; k < n_classes; ++k) {
        const Vector d = m.class_means.row(k).transpose() - m.grand_mean;
        sb.noalias() += static_cast<double>(counts[static_cast<std::size_t>(k)]) * d * d.transpose();
    }
    const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(p, p));
    const Matrix whitened = l_inv * sb * l_inv.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(whitened);
    if (eig.info() != Eigen::Success) throw NumericError("lda: eigen decomposition failed");

    const int ndir = std::min(n_classes - 1, p);
    m.directions.resize(p, ndir);
    for (int d = 0; d < ndir; ++d) {
        // Eigenvalues ascend; take from the top.
        Vector v = eig.eigenvectors().col(p - 1 - d);
        Vector dir = llt.matrixL().transpose().solve(v);
        dir.normalize();
        // Deterministic sign: largest-magnitude entry positive.
        int arg = 0;
        for (int j = 1; j < p; ++j)
            if (std::abs(dir[j]) > std::abs(dir[arg])) arg = j;
        if (dir[arg] < 0) dir = -dir;
        m.directions.col(d) = dir;
    }

    TrainedModel tm;
    tm.kind = ModelKind::lda;
    tm.task = Task::classification;
    tm.n_features = p;
    tm.fitted = std::move(m);
    return tm;
}

Matrix lda_project(const TrainedModel& model, const Matrix& X) {
    const auto* m = std::get_if<LdaModel>(&model.fitted);
    if (!m) throw DataError("lda_project: not an LDA model");
    if (X.cols() != m->grand_mean.size())
        throw DataError("lda_project: feature dimension mismatch");
    return (X.rowwise() - m->grand_mean.transpose()) * m->directions;
}

}  // namespace specstack
