#pragma once

#include "specstack/rng.hpp"
#include "specstack/types.hpp"

#include <vector>

namespace specstack {

// CART node; leaves have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf mean (regression) or majority class index
    int label = -1;      // leaf class (classification)

    bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
    int max_depth = 1 << 20;
    int min_node = 5;  // below this a node becomes a leaf
    int mtry = 0;      // features tried per split; 0 = all
    bool classification = false;
    int n_classes = 0;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict_value(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    int predict_label(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

    bool operator==(const Tree&) const = default;
};

// Builds a CART tree on the given rows. Regression splits maximize variance
// reduction, classification splits maximize Gini gain; the first best split
// wins on ties.
Tree build_tree(const Matrix& X, const Vector& y, const std::vector<int>& labels,
                const std::vector<int>& rows, const TreeParams& params, Rng& rng);

}  // namespace specstack
