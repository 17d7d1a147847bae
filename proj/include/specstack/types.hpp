#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace specstack {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexSet = std::vector<int>;

enum class Task { regression, classification };

std::string task_name(Task t);
Task parse_task(const std::string& s);

// Errors carry a short machine-readable id used by the CLI for exit codes
// and stderr tagging.
class Error : public std::runtime_error {
public:
    Error(std::string id, const std::string& msg)
        : std::runtime_error(msg), id_(std::move(id)) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

// Bad input data (files, matrices, labels).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error("data", msg) {}
};

// Bad configuration or argument values.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config", msg) {}
};

// Numeric failure (non-convergence, singularity past the guards).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error("numeric", msg) {}
};

// Model output. Regression fills `values`; classification fills `probs`
// (rows on the simplex) and `labels` (row argmax, lowest index on ties).
struct Prediction {
    Vector values;
    Matrix probs;
    std::vector<int> labels;

    Eigen::Index size() const {
        return values.size() > 0 ? values.size() : probs.rows();
    }
};

// Argmax with lowest-index tie-break, shared by every classifier.
int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row);

// Renormalize class scores onto the probability simplex: negatives are
// clamped to zero; an all-zero row falls back to uniform.
void renormalize_rows(Matrix& scores);

std::vector<int> argmax_labels(const Matrix& probs);

}  // namespace specstack
