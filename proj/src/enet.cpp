#include "specstack/models.hpp"

#include <algorithm>
#include <cmath>

namespace specstack {

namespace {

double soft_threshold(double z, double g) {
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

// Weighted cyclic coordinate descent for
//   (1/2n) sum_i w_i (z_i - b0 - x_i'b)^2 + lambda (alpha |b|_1 + (1-alpha)/2 |b|_2^2)
// Returns sweeps used, or -1 on non-convergence.
int coordinate_descent(const Matrix& X, const Vector& z, const Vector& w, double alpha,
                       double lambda, Vector& beta, double& b0, const EnetOptions& opts) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    const double wsum = w.sum();

    Vector xw_sq(p);  // (1/n) sum_i w_i x_ij^2
    for (int j = 0; j < p; ++j) xw_sq[j] = X.col(j).array().square().matrix().dot(w) / n;

    // Residual excludes the intercept, which is profiled out each sweep.
    Vector r = z - X * beta;
    b0 = w.dot(r) / wsum;

    const double l1 = lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (int j = 0; j < p; ++j) {
            const double bj = beta[j];
            // rho = (1/n) sum w x (r - b0 + x bj)
            const double rho =
                (X.col(j).array() * w.array() * (r.array() - b0)).sum() / n + xw_sq[j] * bj;
            const double denom = xw_sq[j] + l2;
            double bnew = 0.0;
            if (denom > 0) bnew = soft_threshold(rho, l1) / denom;
            if (bnew != bj) {
                r.noalias() -= X.col(j) * (bnew - bj);
                beta[j] = bnew;
                max_delta = std::max(max_delta, std::abs(bnew - bj));
            }
        }
        const double b0_new = w.dot(r) / wsum;
        max_delta = std::max(max_delta, std::abs(b0_new - b0));
        b0 = b0_new;
        if (max_delta < opts.tol) return sweep + 1;
    }
    return -1;
}

}  // namespace

std::vector<Vector> enet_path(const Matrix& X, const Vector& y, double alpha,
                              const std::vector<double>& lambdas,
                              std::vector<double>* intercepts, const EnetOptions& opts) {
    std::vector<double> order(lambdas);
    std::sort(order.begin(), order.end(), std::greater<>());

    const int n = static_cast<int>(X.rows());
    const Vector w = Vector::Ones(n);
    Vector beta = Vector::Zero(X.cols());
    double b0 = 0;

    std::map<double, std::pair<Vector, double>> by_lambda;
    for (double lambda : order) {
        if (coordinate_descent(X, y, w, alpha, lambda, beta, b0, opts) < 0)
            throw NumericError("enet: coordinate descent did not converge at lambda " +
                               std::to_string(lambda));
        by_lambda[lambda] = {beta, b0};
    }

    std::vector<Vector> out;
    if (intercepts) intercepts->clear();
    for (double lambda : lambdas) {
        out.push_back(by_lambda[lambda].first);
        if (intercepts) intercepts->push_back(by_lambda[lambda].second);
    }
    return out;
}

TrainedModel fit_enet(const Matrix& X, const Targets& y, double alpha, double lambda,
                      const EnetOptions& opts) {
    if (alpha < 0 || alpha > 1) throw ConfigError("enet: alpha must be in [0,1]");
    if (lambda < 0) throw ConfigError("enet: lambda must be >= 0");
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());

    EnetModel m;
    m.alpha = alpha;
    m.lambda = lambda;

    if (y.task == Task::regression) {
        if (y.y.size() != n) throw DataError("enet: target length mismatch");
        Vector beta = Vector::Zero(p);
        double b0 = 0;
        const Vector w = Vector::Ones(n);
        const int sweeps = coordinate_descent(X, y.y, w, alpha, lambda, beta, b0, opts);
        if (sweeps < 0)
            throw NumericError("enet: coordinate descent did not converge in " +
                               std::to_string(opts.max_sweeps) + " sweeps");
        m.coef = beta;
        m.intercept = b0;
        m.sweeps = sweeps;
    } else {
        // Multinomial logistic elastic net: outer IRLS over classes, inner
        // weighted coordinate descent per class (glmnet scheme).
        const int K = y.n_classes;
        if (K < 2) throw DataError("enet: classification needs at least 2 classes");
        if (static_cast<int>(y.labels.size()) != n) throw DataError("enet: label length mismatch");

        Matrix W = Matrix::Zero(K, p);
        Vector b = Vector::Zero(K);
        Matrix indicator = Matrix::Zero(n, K);
        for (int i = 0; i < n; ++i) indicator(i, y.labels[static_cast<std::size_t>(i)]) = 1.0;

        const int max_outer = 100;
        bool converged = false;
        int total_sweeps = 0;
        for (int outer = 0; outer < max_outer && !converged; ++outer) {
            double max_delta = 0.0;
            for (int k = 0; k < K; ++k) {
                // Current probabilities at every IRLS step.
                Matrix eta = (X * W.transpose()).rowwise() + b.transpose();
                Matrix prob = eta;
                for (int i = 0; i < n; ++i) {
                    const double mx = eta.row(i).maxCoeff();
                    prob.row(i) = (eta.row(i).array() - mx).exp();
                    prob.row(i) /= prob.row(i).sum();
                }
                Vector wk(n), zk(n);
                for (int i = 0; i < n; ++i) {
                    const double pik = std::clamp(prob(i, k), 1e-5, 1.0 - 1e-5);
                    wk[i] = pik * (1.0 - pik);
                    zk[i] = eta(i, k) + (indicator(i, k) - prob(i, k)) / wk[i];
                }
                Vector beta_k = W.row(k).transpose();
                double b0k = b[k];
                EnetOptions inner = opts;
                inner.max_sweeps = 200;
                const int sweeps = coordinate_descent(X, zk, wk, alpha, lambda, beta_k, b0k, inner);
                total_sweeps += sweeps < 0 ? inner.max_sweeps : sweeps;
                max_delta = std::max(max_delta, (beta_k - W.row(k).transpose()).cwiseAbs().maxCoeff());
                max_delta = std::max(max_delta, std::abs(b0k - b[k]));
                W.row(k) = beta_k.transpose();
                b[k] = b0k;
            }
            if (max_delta < 1e-6) converged = true;
        }
        if (!converged)
            throw NumericError("enet: multinomial IRLS did not converge in " +
                               std::to_string(max_outer) + " outer iterations");
        m.class_coef = W;
        m.class_intercept = b;
        m.sweeps = total_sweeps;
    }

    TrainedModel tm;
    tm.kind = ModelKind::enet;
    tm.task = y.task;
    tm.params["alpha"] = alpha;
    tm.params["lambda"] = lambda;
    tm.n_features = p;
    tm.fitted = std::move(m);
    return tm;
}

}  // namespace specstack
