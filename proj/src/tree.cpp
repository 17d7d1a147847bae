#include "specstack/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specstack {

namespace {

struct BestSplit {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Sorted (value, row) scan; flat arrays reused across features would be an
// optimization, but node sizes here are small.
struct Scratch {
    std::vector<std::pair<double, int>> order;
};

double node_value(const Vector& y, const std::vector<int>& rows) {
    double s = 0;
    for (int r : rows) s += y[r];
    return s / static_cast<double>(rows.size());
}

int node_label(const std::vector<int>& labels, const std::vector<int>& rows, int n_classes,
               std::vector<int>& counts) {
    counts.assign(static_cast<std::size_t>(n_classes), 0);
    for (int r : rows) ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])];
    int best = 0;
    for (int k = 1; k < n_classes; ++k)
        if (counts[static_cast<std::size_t>(k)] > counts[static_cast<std::size_t>(best)]) best = k;
    return best;
}

// Variance-reduction scan via prefix sums.
bool scan_regression(const Matrix& X, const Vector& y, const std::vector<int>& rows, int feature,
                     Scratch& scratch, BestSplit& best) {
    auto& order = scratch.order;
    order.clear();
    for (int r : rows) order.emplace_back(X(r, feature), r);
    std::sort(order.begin(), order.end());

    const auto n = static_cast<double>(rows.size());
    double total = 0, total_sq = 0;
    for (const auto& [v, r] : order) {
        total += y[r];
        total_sq += y[r] * y[r];
    }
    const double parent_sse = total_sq - total * total / n;

    double left_sum = 0, left_sq = 0;
    bool improved = false;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const double yi = y[order[i].second];
        left_sum += yi;
        left_sq += yi * yi;
        if (order[i].first == order[i + 1].first) continue;
        const auto nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double right_sum = total - left_sum;
        const double right_sq = total_sq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) +
                           (right_sq - right_sum * right_sum / nr);
        const double gain = parent_sse - sse;
        if (gain > best.gain) {
            best.gain = gain;
            best.feature = feature;
            best.threshold = 0.5 * (order[i].first + order[i + 1].first);
            improved = true;
        }
    }
    return improved;
}

// Gini-gain scan via class-count prefixes.
bool scan_classification(const Matrix& X, const std::vector<int>& labels,
                         const std::vector<int>& rows, int feature, int n_classes,
                         Scratch& scratch, BestSplit& best) {
    auto& order = scratch.order;
    order.clear();
    for (int r : rows) order.emplace_back(X(r, feature), r);
    std::sort(order.begin(), order.end());

    std::vector<double> total(static_cast<std::size_t>(n_classes), 0);
    for (const auto& [v, r] : order) total[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])] += 1;
    const auto n = static_cast<double>(rows.size());

    auto gini_impurity = [](const std::vector<double>& counts, double m) {
        double s = 0;
        for (double c : counts) s += c * c;
        return 1.0 - s / (m * m);
    };
    const double parent = gini_impurity(total, n);

    std::vector<double> left(static_cast<std::size_t>(n_classes), 0);
    bool improved = false;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left[static_cast<std::size_t>(labels[static_cast<std::size_t>(order[i].second)])] += 1;
        if (order[i].first == order[i + 1].first) continue;
        const auto nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        double right_impurity_num = 0, left_impurity_num = 0;
        for (int k = 0; k < n_classes; ++k) {
            const double lc = left[static_cast<std::size_t>(k)];
            const double rc = total[static_cast<std::size_t>(k)] - lc;
            left_impurity_num += lc * lc;
            right_impurity_num += rc * rc;
        }
        const double child =
            (nl / n) * (1.0 - left_impurity_num / (nl * nl)) +
            (nr / n) * (1.0 - right_impurity_num / (nr * nr));
        const double gain = parent - child;
        if (gain > best.gain) {
            best.gain = gain;
            best.feature = feature;
            best.threshold = 0.5 * (order[i].first + order[i + 1].first);
            improved = true;
        }
    }
    return improved;
}

struct Builder {
    const Matrix& X;
    const Vector& y;
    const std::vector<int>& labels;
    const TreeParams& params;
    Rng& rng;
    Tree tree;
    Scratch scratch;
    std::vector<int> counts;

    bool pure(const std::vector<int>& rows) const {
        if (params.classification) {
            const int first = labels[static_cast<std::size_t>(rows[0])];
            for (int r : rows)
                if (labels[static_cast<std::size_t>(r)] != first) return false;
            return true;
        }
        const double first = y[rows[0]];
        for (int r : rows)
            if (y[r] != first) return false;
        return true;
    }

    int make_leaf(const std::vector<int>& rows) {
        TreeNode node;
        if (params.classification) {
            node.label = node_label(labels, rows, params.n_classes, counts);
            node.value = node.label;
        } else {
            node.value = node_value(y, rows);
        }
        tree.nodes.push_back(node);
        return static_cast<int>(tree.nodes.size()) - 1;
    }

    int grow(std::vector<int>& rows, int depth) {
        const int n = static_cast<int>(rows.size());
        if (n < 2 || n < params.min_node || depth >= params.max_depth || pure(rows))
            return make_leaf(rows);

        const int p = static_cast<int>(X.cols());
        const int mtry = params.mtry > 0 ? std::min(params.mtry, p) : p;

        BestSplit best;
        if (mtry == p) {
            for (int j = 0; j < p; ++j) try_feature(j, rows, best);
        } else {
            for (int j : rng.sample_without_replacement(p, mtry)) try_feature(j, rows, best);
        }
        if (best.feature < 0) return make_leaf(rows);

        std::vector<int> left_rows, right_rows;
        for (int r : rows)
            (X(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
        if (left_rows.empty() || right_rows.empty()) return make_leaf(rows);

        const int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(idx)].feature = best.feature;
        tree.nodes[static_cast<std::size_t>(idx)].threshold = best.threshold;
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(left_rows, depth + 1);
        const int r = grow(right_rows, depth + 1);
        tree.nodes[static_cast<std::size_t>(idx)].left = l;
        tree.nodes[static_cast<std::size_t>(idx)].right = r;
        return idx;
    }

    void try_feature(int j, const std::vector<int>& rows, BestSplit& best) {
        if (params.classification)
            scan_classification(X, labels, rows, j, params.n_classes, scratch, best);
        else
            scan_regression(X, y, rows, j, scratch, best);
    }
};

}  // namespace

double Tree::predict_value(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

int Tree::predict_label(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].label;
}

Tree build_tree(const Matrix& X, const Vector& y, const std::vector<int>& labels,
                const std::vector<int>& rows, const TreeParams& params, Rng& rng) {
    if (rows.empty()) throw DataError("build_tree: no rows");
    Builder b{X, y, labels, params, rng, {}, {}, {}};
    std::vector<int> root_rows = rows;
    b.grow(root_rows, 0);
    return std::move(b.tree);
}

}  // namespace specstack
