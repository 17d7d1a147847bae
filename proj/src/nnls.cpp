#include "specstack/stacking.hpp"

#include <cmath>
#include <limits>

namespace specstack {

// Lawson-Hanson active set. Exact for the small systems a stacking
// meta-learner sees (M <= ~20 candidates).
NnlsResult nnls(const Matrix& A, const Vector& b) {
    const int n = static_cast<int>(A.cols());
    if (A.rows() != b.size()) throw DataError("nnls: dimension mismatch");

    NnlsResult res;
    res.x = Vector::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);

    Vector w = A.transpose() * (b - A * res.x);
    const double tol = 10.0 * 2.22e-16 * A.norm() * b.norm() + 1e-14;
    const int max_iter = 10 * n;

    auto solve_passive = [&](const std::vector<bool>& set) {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j)
            if (set[static_cast<std::size_t>(j)]) idx.push_back(j);
        Matrix Ap(A.rows(), static_cast<int>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<int>(k)) = A.col(idx[k]);
        const Vector z = Ap.colPivHouseholderQr().solve(b);
        Vector full = Vector::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k) full[idx[k]] = z[static_cast<int>(k)];
        return full;
    };

    for (int outer = 0; outer < max_iter; ++outer) {
        // Most-violating zero coordinate enters the passive set.
        int enter = -1;
        double best = tol;
        for (int j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w[j] > best) {
                best = w[j];
                enter = j;
            }
        if (enter < 0) break;  // KKT satisfied
        passive[static_cast<std::size_t>(enter)] = true;

        Vector z = solve_passive(passive);
        // Inner loop: back off along the segment x -> z until feasible.
        int guard = 0;
        while (true) {
            double min_z = 0;
            bool feasible = true;
            for (int j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && z[j] <= 0) {
                    feasible = false;
                    min_z = std::min(min_z, z[j]);
                }
            if (feasible) break;
            if (++guard > max_iter)
                throw NumericError("nnls: inner loop exceeded iteration bound");
            double step = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && z[j] <= 0) {
                    const double denom = res.x[j] - z[j];
                    if (denom > 0) step = std::min(step, res.x[j] / denom);
                }
            if (!std::isfinite(step)) step = 0.0;
            res.x += step * (z - res.x);
            for (int j = 0; j < n; ++j)
                if (passive[static_cast<std::size_t>(j)] && res.x[j] <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    res.x[j] = 0.0;
                }
            z = solve_passive(passive);
        }
        res.x = z;
        for (int j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)]) res.x[j] = 0.0;
        w = A.transpose() * (b - A * res.x);
        res.iterations = outer + 1;
    }

    // Final KKT sanity: no strongly positive gradient left on the zero set.
    for (int j = 0; j < n; ++j)
        if (!passive[static_cast<std::size_t>(j)] && w[j] > 1e3 * tol + 1e-8 * std::abs(b.norm()))
            throw NumericError("nnls: failed to converge within 10*n iterations");
    return res;
}

}  // namespace specstack
