#pragma once

#include "specstack/config.hpp"
#include "specstack/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace specstack {

struct FisherScores {
    Vector scores;  // >= 0, +inf sentinel for perfect discriminators
    std::vector<int> class_counts;
};

// Per-wavelength ratio of between-group to within-group variance:
//   score_j = sum_k n_k (mu_kj - mu_j)^2 / sum_k n_k var_kj
// Zero within-variance with distinct means yields +inf (ranked first).
FisherScores fisher_scores(const Matrix& X, const std::vector<int>& labels, int n_classes);

// Indices of the k largest scores; ties break toward the lower index.
IndexSet select_top_k(const FisherScores& scores, int k);

struct GaConfig {
    int population_size = 30;
    int generations = 40;
    double crossover_rate = 0.8;
    double mutation_rate = 0.02;
    int elitism = 1;
    int fitness_folds = 5;
    std::uint64_t seed = 0;
};

GaConfig ga_config_from(const Config& cfg);

// Mean cross-validated accuracy of a classifier on the selected columns;
// the GA's fitness function. The fold plan is fixed by `seed` so every
// chromosome is scored against the same folds.
using WrappedClassifier =
    std::function<double(const Matrix& x_selected, const std::vector<int>& labels,
                         int n_classes, int folds, std::uint64_t seed)>;

// Default wrapped classifier: LDA under k-fold CV.
double lda_cv_accuracy(const Matrix& x_selected, const std::vector<int>& labels, int n_classes,
                       int folds, std::uint64_t seed);

// Binary-chromosome GA over wavelength subsets: uniform crossover, per-bit
// mutation, size-2 tournament selection, elitism. Deterministic given the
// seed; per-individual randomness derives from (seed, generation, index).
IndexSet ga_select(const Matrix& X, const std::vector<int>& labels, int n_classes,
                   const GaConfig& config, const WrappedClassifier& classifier = lda_cv_accuracy);

// Fitness of one chromosome (exposed for the exhaustive-subset oracle).
double ga_fitness(const Matrix& X, const std::vector<int>& labels, int n_classes,
                  const std::vector<std::uint8_t>& chromosome, const GaConfig& config,
                  const WrappedClassifier& classifier);

}  // namespace specstack
