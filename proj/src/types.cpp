#include "specstack/types.hpp"

namespace specstack {

std::string task_name(Task t) {
    return t == Task::regression ? "regression" : "classification";
}

Task parse_task(const std::string& s) {
    if (s == "regression") return Task::regression;
    if (s == "classification") return Task::classification;
    throw ConfigError("unknown task: " + s);
}

int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    int best = 0;
    for (int j = 1; j < row.size(); ++j)
        if (row[j] > row[best]) best = j;
    return best;
}

void renormalize_rows(Matrix& scores) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        for (Eigen::Index j = 0; j < scores.cols(); ++j)
            if (scores(i, j) < 0) scores(i, j) = 0;
        const double s = scores.row(i).sum();
        if (s <= 0)
            scores.row(i).setConstant(1.0 / static_cast<double>(scores.cols()));
        else
            scores.row(i) /= s;
    }
}

std::vector<int> argmax_labels(const Matrix& probs) {
    std::vector<int> labels(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        labels[static_cast<std::size_t>(i)] = argmax_row(probs.row(i));
    return labels;
}

}  // namespace specstack
