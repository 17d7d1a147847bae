#pragma once

// Independent oracles for the test suites. Everything here deliberately
// takes a different algorithmic route from the library implementations:
// normal equations instead of NIPALS/coordinate descent, projected and
// proximal gradient instead of active sets, closed-form ANOVA instead of
// profiled REML.

#include "specstack/rng.hpp"
#include "specstack/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace oracle {

using specstack::Matrix;
using specstack::Vector;

// OLS with intercept via QR on the augmented design.
struct Ols {
    Vector coef;
    double intercept = 0.0;

    static Ols fit(const Matrix& X, const Vector& y) {
        Matrix design(X.rows(), X.cols() + 1);
        design.col(0).setOnes();
        design.rightCols(X.cols()) = X;
        const Vector beta = design.colPivHouseholderQr().solve(y);
        Ols o;
        o.intercept = beta[0];
        o.coef = beta.tail(X.cols());
        return o;
    }

    Vector predict(const Matrix& X) const { return (X * coef).array() + intercept; }
};

// Elastic net objective: (1/2n)||y - b0 - X b||^2 + lambda (alpha |b|_1 +
// (1-alpha)/2 |b|_2^2).
inline double enet_objective(const Matrix& X, const Vector& y, double alpha, double lambda,
                             const Vector& beta, double b0) {
    const auto n = static_cast<double>(X.rows());
    const Vector r = y.array() - b0 - (X * beta).array();
    return r.squaredNorm() / (2.0 * n) +
           lambda * (alpha * beta.cwiseAbs().sum() + 0.5 * (1.0 - alpha) * beta.squaredNorm());
}

// Proximal-gradient (ISTA) elastic net run to a tight tolerance.
inline void enet_proximal_gradient(const Matrix& X, const Vector& y, double alpha, double lambda,
                                   Vector& beta, double& b0, int max_iters = 400000,
                                   double tol = 1e-13) {
    const auto n = static_cast<double>(X.rows());
    beta = Vector::Zero(X.cols());
    b0 = y.mean();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(X.transpose() * X / n);
    const double lip = eig.eigenvalues().maxCoeff() + lambda * (1.0 - alpha) + 1e-12;
    const double step = 1.0 / lip;
    const double thresh = step * lambda * alpha;

    for (int it = 0; it < max_iters; ++it) {
        const Vector r = y.array() - b0 - (X * beta).array();
        const Vector grad = -(X.transpose() * r) / n + lambda * (1.0 - alpha) * beta;
        Vector beta_new = beta - step * grad;
        for (Eigen::Index j = 0; j < beta_new.size(); ++j) {
            if (beta_new[j] > thresh)
                beta_new[j] -= thresh;
            else if (beta_new[j] < -thresh)
                beta_new[j] += thresh;
            else
                beta_new[j] = 0.0;
        }
        const double b0_new = (y - X * beta_new).mean();
        const double delta =
            std::max((beta_new - beta).cwiseAbs().maxCoeff(), std::abs(b0_new - b0));
        beta = beta_new;
        b0 = b0_new;
        if (delta < tol) break;
    }
}

// KKT residual of an elastic-net solution (0 at the exact optimum).
inline double enet_kkt_residual(const Matrix& X, const Vector& y, double alpha, double lambda,
                                const Vector& beta, double b0) {
    const auto n = static_cast<double>(X.rows());
    const Vector r = y.array() - b0 - (X * beta).array();
    double worst = std::abs(r.mean());  // intercept stationarity
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double g = -X.col(j).dot(r) / n + lambda * (1.0 - alpha) * beta[j];
        if (beta[j] > 0)
            worst = std::max(worst, std::abs(g + lambda * alpha));
        else if (beta[j] < 0)
            worst = std::max(worst, std::abs(g - lambda * alpha));
        else
            worst = std::max(worst, std::max(0.0, std::abs(g) - lambda * alpha));
    }
    return worst;
}

// Projected-gradient NNLS with acceleration, run far past the target
// tolerance; the independent check for the active-set implementation.
inline Vector nnls_projected_gradient(const Matrix& A, const Vector& b, int max_iters = 200000,
                                      double tol = 1e-12) {
    Vector x = Vector::Zero(A.cols());
    Vector z = x;
    double t_accel = 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(A.transpose() * A);
    const double step = 1.0 / (eig.eigenvalues().maxCoeff() + 1e-12);
    for (int it = 0; it < max_iters; ++it) {
        const Vector grad = A.transpose() * (A * z - b);
        Vector x_new = (z - step * grad).cwiseMax(0.0);
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_accel * t_accel));
        z = x_new + ((t_accel - 1.0) / t_new) * (x_new - x);
        // Restart on non-monotone steps keeps FISTA honest near the boundary.
        if ((A * x_new - b).squaredNorm() > (A * x - b).squaredNorm()) {
            z = x_new;
            t_accel = 1.0;
        } else {
            t_accel = t_new;
        }
        const double delta = (x_new - x).cwiseAbs().maxCoeff();
        x = x_new;
        if (delta < tol && it > 10) break;
    }
    return x;
}

inline double nnls_kkt_residual(const Matrix& A, const Vector& b, const Vector& x) {
    const Vector w = A.transpose() * (b - A * x);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] > 0)
            worst = std::max(worst, std::abs(w[j]));
        else
            worst = std::max(worst, w[j]);  // must not be strongly positive
    }
    return worst;
}

// Discriminant directions from the generalized symmetric eigenproblem
// S_b v = lambda S_w v, unit-normalized, sign fixed like the library.
inline Matrix lda_directions_eigen(const Matrix& X, const std::vector<int>& labels,
                                   int n_classes) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    Matrix means = Matrix::Zero(n_classes, p);
    for (int i = 0; i < n; ++i) {
        means.row(labels[static_cast<std::size_t>(i)]) += X.row(i);
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    for (int k = 0; k < n_classes; ++k) means.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);

    Matrix sw = Matrix::Zero(p, p);
    for (int i = 0; i < n; ++i) {
        const Eigen::RowVectorXd d = X.row(i) - means.row(labels[static_cast<std::size_t>(i)]);
        sw += d.transpose() * d;
    }
    sw /= static_cast<double>(n - n_classes);
    sw += (1e-8 * sw.trace() / p) * Matrix::Identity(p, p);

    const Eigen::RowVectorXd grand = X.colwise().mean();
    Matrix sb = Matrix::Zero(p, p);
    for (int k = 0; k < n_classes; ++k) {
        const Eigen::RowVectorXd d = means.row(k) - grand;
        sb += counts[static_cast<std::size_t>(k)] * d.transpose() * d;
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(sb, sw);
    const int ndir = std::min(n_classes - 1, p);
    Matrix dirs(p, ndir);
    for (int d = 0; d < ndir; ++d) {
        Vector v = eig.eigenvectors().col(p - 1 - d);
        v.normalize();
        int arg = 0;
        for (int j = 1; j < p; ++j)
            if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
        if (v[arg] < 0) v = -v;
        dirs.col(d) = v;
    }
    return dirs;
}

// Balanced one-way ANOVA method-of-moments estimates (equal REML in the
// interior case).
struct AnovaOneWay {
    double mse = 0.0;
    double msb = 0.0;
    double sigma2_between = 0.0;  // (MSB - MSE)/n, truncated at 0

    static AnovaOneWay compute(const std::vector<std::vector<double>>& groups) {
        const auto g = static_cast<double>(groups.size());
        const auto n = static_cast<double>(groups.front().size());
        double grand = 0.0;
        for (const auto& grp : groups)
            for (double v : grp) grand += v;
        grand /= g * n;

        AnovaOneWay a;
        double ssb = 0.0, sse = 0.0;
        for (const auto& grp : groups) {
            double mean = 0.0;
            for (double v : grp) mean += v;
            mean /= n;
            ssb += n * (mean - grand) * (mean - grand);
            for (double v : grp) sse += (v - mean) * (v - mean);
        }
        a.msb = ssb / (g - 1.0);
        a.mse = sse / (g * (n - 1.0));
        a.sigma2_between = std::max(0.0, (a.msb - a.mse) / n);
        return a;
    }
};

// Deterministic helpers for random test problems.
inline Matrix random_matrix(int rows, int cols, specstack::Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
    return m;
}

inline Vector random_vector(int size, specstack::Rng& rng) {
    Vector v(size);
    for (int i = 0; i < size; ++i) v[i] = rng.next_normal();
    return v;
}

}  // namespace oracle
