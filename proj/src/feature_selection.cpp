#include "specstack/feature_selection.hpp"

#include "specstack/cv_harness.hpp"
#include "specstack/models.hpp"
#include "specstack/parallel.hpp"
#include "specstack/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace specstack {

FisherScores fisher_scores(const Matrix& X, const std::vector<int>& labels, int n_classes) {
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());
    if (n_classes < 2) throw DataError("fisher_scores: need at least 2 classes");
    if (static_cast<int>(labels.size()) != n) throw DataError("fisher_scores: label length mismatch");

    FisherScores fs;
    fs.class_counts.assign(static_cast<std::size_t>(n_classes), 0);
    for (int l : labels) {
        if (l < 0 || l >= n_classes) throw DataError("fisher_scores: label outside class set");
        ++fs.class_counts[static_cast<std::size_t>(l)];
    }
    for (int k = 0; k < n_classes; ++k)
        if (fs.class_counts[static_cast<std::size_t>(k)] < 2)
            throw DataError("fisher_scores: class " + std::to_string(k) +
                            " has fewer than 2 samples");

    Matrix class_means = Matrix::Zero(n_classes, p);
    for (int i = 0; i < n; ++i) class_means.row(labels[static_cast<std::size_t>(i)]) += X.row(i);
    for (int k = 0; k < n_classes; ++k)
        class_means.row(k) /= static_cast<double>(fs.class_counts[static_cast<std::size_t>(k)]);
    const Eigen::RowVectorXd grand_mean = X.colwise().mean();

    Matrix within = Matrix::Zero(n_classes, p);  // sum of squared deviations
    for (int i = 0; i < n; ++i) {
        const int k = labels[static_cast<std::size_t>(i)];
        within.row(k) += (X.row(i) - class_means.row(k)).array().square().matrix();
    }

    fs.scores.resize(p);
    for (int j = 0; j < p; ++j) {
        double between = 0, denom = 0;
        for (int k = 0; k < n_classes; ++k) {
            const auto nk = static_cast<double>(fs.class_counts[static_cast<std::size_t>(k)]);
            const double d = class_means(k, j) - grand_mean[j];
            between += nk * d * d;
            denom += nk * (within(k, j) / (nk - 1.0));
        }
        if (denom > 0)
            fs.scores[j] = between / denom;
        else
            fs.scores[j] = between > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return fs;
}

IndexSet select_top_k(const FisherScores& scores, int k) {
    const int p = static_cast<int>(scores.scores.size());
    if (k < 1 || k > p) throw ConfigError("select_top_k: k outside [1, p]");
    IndexSet order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores.scores[a] != scores.scores[b]) return scores.scores[a] > scores.scores[b];
        return a < b;
    });
    IndexSet out(order.begin(), order.begin() + k);
    std::sort(out.begin(), out.end());
    return out;
}

GaConfig ga_config_from(const Config& cfg) {
    GaConfig ga;
    ga.population_size = static_cast<int>(cfg.get_int("ga.population_size", ga.population_size));
    ga.generations = static_cast<int>(cfg.get_int("ga.generations", ga.generations));
    ga.crossover_rate = cfg.get_double("ga.crossover_rate", ga.crossover_rate);
    ga.mutation_rate = cfg.get_double("ga.mutation_rate", ga.mutation_rate);
    ga.elitism = static_cast<int>(cfg.get_int("ga.elitism", ga.elitism));
    ga.fitness_folds = static_cast<int>(cfg.get_int("ga.fitness_folds", ga.fitness_folds));
    ga.seed = static_cast<std::uint64_t>(cfg.get_int("ga.seed", 0));
    return ga;
}

namespace {

void validate(const GaConfig& c) {
    if (c.population_size < 2) throw ConfigError("ga: population_size must be >= 2");
    if (c.generations < 0) throw ConfigError("ga: generations must be >= 0");
    if (c.crossover_rate < 0 || c.crossover_rate > 1)
        throw ConfigError("ga: crossover_rate must be in [0,1]");
    if (c.mutation_rate < 0 || c.mutation_rate > 1)
        throw ConfigError("ga: mutation_rate must be in [0,1]");
    if (c.elitism < 0 || c.elitism >= c.population_size)
        throw ConfigError("ga: elitism must be in [0, population_size)");
    if (c.fitness_folds < 2) throw ConfigError("ga: fitness_folds must be >= 2");
}

using Chromosome = std::vector<std::uint8_t>;

Matrix select_columns(const Matrix& X, const Chromosome& bits) {
    int count = 0;
    for (auto b : bits) count += b;
    Matrix out(X.rows(), count);
    int c = 0;
    for (std::size_t j = 0; j < bits.size(); ++j)
        if (bits[j]) out.col(c++) = X.col(static_cast<int>(j));
    return out;
}

}  // namespace

double lda_cv_accuracy(const Matrix& x_selected, const std::vector<int>& labels, int n_classes,
                       int folds, std::uint64_t seed) {
    const int n = static_cast<int>(x_selected.rows());
    IndexSet all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    const int k = std::min(folds, n);
    const auto plan = make_kfold(all, k, &labels, seed);

    double acc_sum = 0;
    for (const auto& fold : plan) {
        IndexSet in_rows;
        for (int i = 0; i < n; ++i)
            if (!std::binary_search(fold.begin(), fold.end(), i)) in_rows.push_back(i);
        Matrix x_in(in_rows.size(), x_selected.cols());
        std::vector<int> y_in;
        for (std::size_t i = 0; i < in_rows.size(); ++i) {
            x_in.row(static_cast<int>(i)) = x_selected.row(in_rows[i]);
            y_in.push_back(labels[static_cast<std::size_t>(in_rows[i])]);
        }
        Matrix x_out(fold.size(), x_selected.cols());
        std::vector<int> y_out;
        for (std::size_t i = 0; i < fold.size(); ++i) {
            x_out.row(static_cast<int>(i)) = x_selected.row(fold[i]);
            y_out.push_back(labels[static_cast<std::size_t>(fold[i])]);
        }
        const TrainedModel model = fit_lda(x_in, y_in, n_classes);
        const Prediction pred = predict(model, x_out);
        acc_sum += metric_accuracy(pred.labels, y_out);
    }
    return acc_sum / static_cast<double>(plan.size());
}

double ga_fitness(const Matrix& X, const std::vector<int>& labels, int n_classes,
                  const Chromosome& chromosome, const GaConfig& config,
                  const WrappedClassifier& classifier) {
    bool any = false;
    for (auto b : chromosome)
        if (b) {
            any = true;
            break;
        }
    if (!any) return -std::numeric_limits<double>::infinity();
    try {
        return classifier(select_columns(X, chromosome), labels, n_classes,
                          config.fitness_folds, derive_seed(config.seed, {91}));
    } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();
    }
}

IndexSet ga_select(const Matrix& X, const std::vector<int>& labels, int n_classes,
                   const GaConfig& config, const WrappedClassifier& classifier) {
    validate(config);
    const int p = static_cast<int>(X.cols());
    const int pop_size = config.population_size;

    std::vector<Chromosome> pop(static_cast<std::size_t>(pop_size));
    for (int i = 0; i < pop_size; ++i) {
        Rng rng(derive_seed(config.seed, {0, static_cast<std::uint64_t>(i)}));
        Chromosome c(static_cast<std::size_t>(p));
        for (auto& bit : c) bit = rng.next_bool(0.5) ? 1 : 0;
        pop[static_cast<std::size_t>(i)] = std::move(c);
    }

    std::vector<double> fitness(static_cast<std::size_t>(pop_size));
    auto evaluate = [&](const std::vector<Chromosome>& population) {
        parallel_for(pop_size, 1, [&](int i) {
            fitness[static_cast<std::size_t>(i)] =
                ga_fitness(X, labels, n_classes, population[static_cast<std::size_t>(i)], config,
                           classifier);
        });
    };
    evaluate(pop);

    auto best_index = [&]() {
        int best = 0;
        for (int i = 1; i < pop_size; ++i)
            if (fitness[static_cast<std::size_t>(i)] > fitness[static_cast<std::size_t>(best)])
                best = i;
        return best;
    };

    for (int gen = 1; gen <= config.generations; ++gen) {
        // Elite carry-over: best `elitism` members, ties to the lower index.
        std::vector<int> order(static_cast<std::size_t>(pop_size));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return fitness[static_cast<std::size_t>(a)] > fitness[static_cast<std::size_t>(b)];
        });

        std::vector<Chromosome> next(static_cast<std::size_t>(pop_size));
        for (int e = 0; e < config.elitism; ++e)
            next[static_cast<std::size_t>(e)] = pop[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])];

        for (int i = config.elitism; i < pop_size; ++i) {
            Rng rng(derive_seed(config.seed,
                                {static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(i)}));
            auto tournament = [&]() -> const Chromosome& {
                const int a = rng.next_int(pop_size);
                const int b = rng.next_int(pop_size);
                const bool a_wins = fitness[static_cast<std::size_t>(a)] >
                                        fitness[static_cast<std::size_t>(b)] ||
                                    (fitness[static_cast<std::size_t>(a)] ==
                                         fitness[static_cast<std::size_t>(b)] &&
                                     a <= b);
                return pop[static_cast<std::size_t>(a_wins ? a : b)];
            };
            const Chromosome& p1 = tournament();
            const Chromosome& p2 = tournament();
            Chromosome child(static_cast<std::size_t>(p));
            if (rng.next_bool(config.crossover_rate)) {
                for (int j = 0; j < p; ++j)
                    child[static_cast<std::size_t>(j)] =
                        rng.next_bool(0.5) ? p1[static_cast<std::size_t>(j)]
                                           : p2[static_cast<std::size_t>(j)];
            } else {
                child = p1;
            }
            for (int j = 0; j < p; ++j)
                if (rng.next_bool(config.mutation_rate))
                    child[static_cast<std::size_t>(j)] ^= 1;
            next[static_cast<std::size_t>(i)] = std::move(child);
        }
        pop = std::move(next);
        evaluate(pop);
    }

    const Chromosome& best = pop[static_cast<std::size_t>(best_index())];
    IndexSet out;
    for (int j = 0; j < p; ++j)
        if (best[static_cast<std::size_t>(j)]) out.push_back(j);
    if (out.empty()) throw NumericError("ga_select: best chromosome is empty");
    return out;
}

}  // namespace specstack
