#include "specstack/cv_harness.hpp"

#include "specstack/csv.hpp"
#include "specstack/feature_selection.hpp"
#include "specstack/parallel.hpp"
#include "specstack/rng.hpp"
#include "specstack/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace specstack {

SplitPlan make_random_splits(int n_rows, int n_splits, double train_fraction,
                             const std::vector<int>* stratify_labels, int n_classes,
                             std::uint64_t master_seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("train_fraction must be in (0,1)");
    if (n_splits < 1) throw ConfigError("n_splits must be >= 1");
    if (n_rows < 2) throw DataError("need at least 2 rows to split");

    SplitPlan plan;
    plan.train_fraction = train_fraction;
    plan.master_seed = master_seed;
    plan.stratified = stratify_labels != nullptr;

    for (int s = 0; s < n_splits; ++s) {
        Rng rng(derive_seed(master_seed, {1, static_cast<std::uint64_t>(s)}));
        Split split;
        if (!stratify_labels) {
            std::vector<int> idx(static_cast<std::size_t>(n_rows));
            for (int i = 0; i < n_rows; ++i) idx[static_cast<std::size_t>(i)] = i;
            rng.shuffle(idx);
            int n_test = static_cast<int>(std::llround(n_rows * (1.0 - train_fraction)));
            n_test = std::clamp(n_test, 1, n_rows - 1);
            split.test.assign(idx.begin(), idx.begin() + n_test);
            split.train.assign(idx.begin() + n_test, idx.end());
        } else {
            if (static_cast<int>(stratify_labels->size()) != n_rows)
                throw DataError("stratify labels length mismatch");
            for (int k = 0; k < n_classes; ++k) {
                std::vector<int> members;
                for (int i = 0; i < n_rows; ++i)
                    if ((*stratify_labels)[static_cast<std::size_t>(i)] == k)
                        members.push_back(i);
                if (members.size() < 2)
                    throw DataError("class " + std::to_string(k) +
                                    " too small for stratified splitting");
                rng.shuffle(members);
                int n_test = static_cast<int>(
                    std::llround(static_cast<double>(members.size()) * (1.0 - train_fraction)));
                n_test = std::clamp(n_test, 1, static_cast<int>(members.size()) - 1);
                split.test.insert(split.test.end(), members.begin(), members.begin() + n_test);
                split.train.insert(split.train.end(), members.begin() + n_test, members.end());
            }
            std::sort(split.test.begin(), split.test.end());
            std::sort(split.train.begin(), split.train.end());
        }
        plan.splits.push_back(std::move(split));
    }
    return plan;
}

std::vector<IndexSet> make_kfold(const IndexSet& rows, int k,
                                 const std::vector<int>* stratify_labels, std::uint64_t seed) {
    const int n = static_cast<int>(rows.size());
    if (k < 2) throw ConfigError("k-fold needs k >= 2");
    if (k > n) throw DataError("k-fold: k exceeds row count");

    std::vector<IndexSet> folds(static_cast<std::size_t>(k));
    Rng rng(derive_seed(seed, {2}));

    if (!stratify_labels) {
        IndexSet shuffled = rows;
        rng.shuffle(shuffled);
        // Round-robin keeps sizes within one of each other, larger folds first.
        for (int i = 0; i < n; ++i)
            folds[static_cast<std::size_t>(i % k)].push_back(shuffled[static_cast<std::size_t>(i)]);
    } else {
        // Per class, deal into the currently smallest fold.
        std::set<int> classes(stratify_labels->begin(), stratify_labels->end());
        for (int c : classes) {
            IndexSet members;
            for (int r : rows)
                if ((*stratify_labels)[static_cast<std::size_t>(r)] == c) members.push_back(r);
            rng.shuffle(members);
            for (int r : members) {
                int target = 0;
                for (int f = 1; f < k; ++f)
                    if (folds[static_cast<std::size_t>(f)].size() <
                        folds[static_cast<std::size_t>(target)].size())
                        target = f;
                folds[static_cast<std::size_t>(target)].push_back(r);
            }
        }
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

double metric_rmse(const Vector& pred, const Vector& obs) {
    if (pred.size() != obs.size() || pred.size() == 0)
        throw DataError("rmse: length mismatch or empty input");
    return std::sqrt((pred - obs).squaredNorm() / static_cast<double>(pred.size()));
}

double metric_accuracy(const std::vector<int>& pred, const std::vector<int>& obs) {
    if (pred.size() != obs.size() || pred.empty())
        throw DataError("accuracy: length mismatch or empty input");
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == obs[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::vector<ExternalCandidate> ingest_external_predictions(const std::string& path,
                                                           const SplitPlan& plan,
                                                           int n_classes) {
    const CsvTable csv = read_csv(path);
    if (csv.header.size() < 4 || csv.header[0] != "split_id" || csv.header[1] != "row_id" ||
        csv.header[2] != "candidate_id")
        throw DataError(path + ": expected header split_id,row_id,candidate_id,value...");
    const int width = static_cast<int>(csv.header.size()) - 3;
    const int expected = n_classes > 0 ? n_classes : 1;
    if (width != expected)
        throw DataError(path + ": expected " + std::to_string(expected) +
                        " value column(s), got " + std::to_string(width));

    std::map<std::string, ExternalCandidate> by_id;
    for (const auto& row : csv.rows) {
        const int split_id = static_cast<int>(parse_double(row[0], "split_id"));
        if (split_id < 0 || split_id >= plan.n_splits())
            throw DataError(path + ": unknown split id " + row[0]);
        const int row_id = static_cast<int>(parse_double(row[1], "row_id"));
        auto& cand = by_id[row[2]];
        if (cand.id.empty()) {
            cand.id = row[2];
            cand.by_split.resize(static_cast<std::size_t>(plan.n_splits()));
        }
        Vector v(width);
        for (int j = 0; j < width; ++j)
            v[j] = parse_double(row[static_cast<std::size_t>(3 + j)], "prediction value");
        cand.by_split[static_cast<std::size_t>(split_id)][row_id] = v;
    }

    std::vector<ExternalCandidate> out;
    for (auto& [id, cand] : by_id) {
        // Every split's test rows must be covered; training coverage is
        // all-or-nothing and unlocks stacking.
        bool any_train = false, all_train = true;
        for (int s = 0; s < plan.n_splits(); ++s) {
            const auto& preds = cand.by_split[static_cast<std::size_t>(s)];
            for (int r : plan.splits[static_cast<std::size_t>(s)].test)
                if (!preds.count(r))
                    throw DataError(path + ": candidate '" + id + "' missing test row " +
                                    std::to_string(r) + " of split " + std::to_string(s));
            for (int r : plan.splits[static_cast<std::size_t>(s)].train) {
                if (preds.count(r))
                    any_train = true;
                else
                    all_train = false;
            }
        }
        if (any_train && !all_train)
            throw DataError(path + ": candidate '" + id +
                            "' covers training rows only partially; supply all or none");
        cand.covers_train = any_train && all_train;
        out.push_back(std::move(cand));
    }
    return out;
}

std::vector<ModelSpec> build_roster(const Config& cfg, Task task, int n, int p) {
    std::vector<ModelSpec> roster;
    std::set<std::string> seen;
    const auto names = cfg.get_list("candidates");
    if (names.empty()) throw ConfigError("candidates list is empty");
    for (const auto& entry : names) {
        // "id:kind" or a bare kind name; "lasso" is enet pinned at alpha=1.
        std::string id = entry, kind_str = entry;
        const auto colon = entry.find(':');
        if (colon != std::string::npos) {
            id = trim(entry.substr(0, colon));
            kind_str = trim(entry.substr(colon + 1));
        }
        if (!seen.insert(id).second) throw ConfigError("duplicate candidate id: " + id);

        ModelSpec spec;
        spec.id = id;
        spec.kind = parse_kind(kind_str);
        spec.task = task;

        std::map<std::string, std::vector<double>> values;
        static const std::vector<std::string> grid_keys{
            "ncomp", "alpha", "lambda", "ntrees", "mtry", "min_node", "depth", "shrinkage"};
        for (const auto& key : grid_keys) {
            if (cfg.has("model." + id + "." + key))
                values[key] = cfg.get_double_list("model." + id + "." + key);
            else if (id != kind_str && cfg.has("model." + kind_str + "." + key))
                values[key] = cfg.get_double_list("model." + kind_str + "." + key);
        }
        if (kind_str == "lasso") values["alpha"] = {1.0};
        spec.grid = values.empty() ? default_grid(spec.kind, task, n, p) : expand_grid(values);
        if (kind_str == "lasso" && !cfg.has("model." + id + ".lambda") &&
            !cfg.has("model.lasso.lambda") && values.size() == 1) {
            // Only alpha pinned: graft the default lambda list on top.
            auto g = default_grid(ModelKind::enet, task, n, p);
            std::map<std::string, std::vector<double>> lasso_values;
            std::set<double> lambdas;
            for (const auto& pt : g.points) lambdas.insert(pt.at("lambda"));
            lasso_values["alpha"] = {1.0};
            lasso_values["lambda"] = std::vector<double>(lambdas.begin(), lambdas.end());
            spec.grid = expand_grid(lasso_values);
        }
        validate_grid(spec.kind, task, spec.grid);
        roster.push_back(std::move(spec));
    }
    return roster;
}

namespace {

struct UnitKey {
    int trait_idx;  // -1 for classification
    int split_id;
};

struct UnitOutput {
    std::vector<PerformanceRecord> records;
    std::vector<CellStatus> statuses;
};

// One (trait x split) work unit of the benchmark loop.
UnitOutput run_unit(const SpectraDataset& data, const BenchmarkConfig& config,
                    const SplitPlan& plan, const UnitKey& key) {
    UnitOutput out;
    const Split& split = plan.splits[static_cast<std::size_t>(key.split_id)];
    const bool classification = config.task == Task::classification;
    const std::string trait_id =
        classification ? (data.label_name.empty() ? "label" : data.label_name)
                       : data.trait_names[static_cast<std::size_t>(key.trait_idx)];
    const std::string metric = classification ? "acc" : "rmse";
    const std::uint64_t unit_seed = derive_seed(
        config.master_seed,
        {101, static_cast<std::uint64_t>(key.trait_idx + 1), static_cast<std::uint64_t>(key.split_id)});

    auto emit = [&](const std::string& model_id, double value, bool ok, const std::string& msg) {
        out.records.push_back({key.split_id, model_id, trait_id, metric, value});
        out.statuses.push_back({key.split_id, model_id, trait_id, ok, msg});
    };
    const double missing = std::numeric_limits<double>::quiet_NaN();

    // Targets on the standardized (train-statistics) scale.
    Targets targets;
    targets.task = config.task;
    Vector y_full;
    if (classification) {
        targets.labels = data.labels;
        targets.n_classes = static_cast<int>(data.classes.size());
    } else {
        y_full = data.traits.col(key.trait_idx);
        double mean = 0, sd = 1;
        Matrix ym = y_full;
        const Standardizer ystd = fit_standardizer(ym, split.train, "trait");
        mean = ystd.means[0];
        sd = ystd.sds[0];
        targets.y = (y_full.array() - mean) / sd;
    }

    // Optional classification wavelength selection on training rows only.
    Matrix X = data.absorbance;
    if (classification && (config.fisher_top_k > 0 || config.ga_enabled)) {
        Matrix x_train(split.train.size(), X.cols());
        std::vector<int> train_labels;
        for (std::size_t i = 0; i < split.train.size(); ++i) {
            x_train.row(static_cast<int>(i)) = X.row(split.train[i]);
            train_labels.push_back(data.labels[static_cast<std::size_t>(split.train[i])]);
        }
        IndexSet selected(static_cast<std::size_t>(X.cols()));
        for (std::size_t i = 0; i < selected.size(); ++i) selected[i] = static_cast<int>(i);
        if (config.fisher_top_k > 0) {
            const FisherScores scores = fisher_scores(x_train, train_labels, targets.n_classes);
            selected = select_top_k(scores, std::min<int>(config.fisher_top_k,
                                                          static_cast<int>(X.cols())));
        }
        if (config.ga_enabled) {
            Matrix x_sel(x_train.rows(), static_cast<int>(selected.size()));
            for (std::size_t j = 0; j < selected.size(); ++j)
                x_sel.col(static_cast<int>(j)) = x_train.col(selected[j]);
            GaConfig ga = ga_config_from(config.ga_config);
            ga.seed = derive_seed(unit_seed, {77});
            const IndexSet ga_sel = ga_select(x_sel, train_labels, targets.n_classes, ga);
            IndexSet mapped;
            for (int j : ga_sel) mapped.push_back(selected[static_cast<std::size_t>(j)]);
            selected = mapped;
        }
        Matrix reduced(X.rows(), static_cast<int>(selected.size()));
        for (std::size_t j = 0; j < selected.size(); ++j)
            reduced.col(static_cast<int>(j)) = X.col(selected[j]);
        X = std::move(reduced);
    }

    // Split-level standardizer (train rows only) for the final fits.
    Standardizer split_std;
    try {
        split_std = fit_standardizer(X, split.train, "split " + std::to_string(key.split_id));
    } catch (const Error& e) {
        for (const auto& c : config.candidates) emit(c.id, missing, false, e.what());
        for (const auto& ens : config.ensembles) emit(ens, missing, false, e.what());
        return out;
    }
    Matrix x_train(split.train.size(), X.cols());
    for (std::size_t i = 0; i < split.train.size(); ++i)
        x_train.row(static_cast<int>(i)) = X.row(split.train[i]);
    Matrix x_test(split.test.size(), X.cols());
    for (std::size_t i = 0; i < split.test.size(); ++i)
        x_test.row(static_cast<int>(i)) = X.row(split.test[i]);
    const Matrix x_train_std = apply_standardizer(split_std, x_train);
    const Matrix x_test_std = apply_standardizer(split_std, x_test);

    const Targets y_train = targets.subset(split.train);
    const Targets y_test = targets.subset(split.test);

    // Shared 10-fold plan over the training rows (Algorithm 1 step 2).
    const int k = std::min<int>(config.inner_folds, static_cast<int>(split.train.size()));
    const auto folds = make_kfold(split.train, k,
                                  classification ? &data.labels : nullptr,
                                  derive_seed(unit_seed, {3}));

    // Steps 3+5 per candidate: OOF block plus the tuned full-train model.
    struct CandidateState {
        bool ok = false;
        std::string error;
        OofPredictions oof;
        Prediction test_pred;
    };
    std::vector<CandidateState> states(config.candidates.size());

    // Local positions of each fold inside the training block, for tuning.
    std::map<int, int> train_pos;
    for (std::size_t i = 0; i < split.train.size(); ++i) train_pos[split.train[i]] = static_cast<int>(i);
    std::vector<IndexSet> folds_local(folds.size());
    for (std::size_t f = 0; f < folds.size(); ++f)
        for (int r : folds[f]) folds_local[f].push_back(train_pos.at(r));

    for (std::size_t m = 0; m < config.candidates.size(); ++m) {
        CandidateState& st = states[m];
        const ModelSpec& cand = config.candidates[m];
        try {
            st.oof = generate_oof({cand}, X, targets, split.train, folds, key.split_id,
                                  unit_seed, config.inner_folds);
            // Step 5: tune on the full training set (same 10 folds), then fit
            // with the split-level standardizer.
            Hyperparams chosen;
            if (cand.grid.points.size() == 1) {
                chosen = cand.grid.points.front();
            } else {
                ModelSpec local_spec = cand;
                local_spec.seed = derive_seed(unit_seed, {5, m, 1});
                chosen = tune(local_spec, x_train, y_train, folds_local);
            }
            TrainedModel model = fit_model(cand.kind, cand.task, x_train_std, y_train, chosen,
                                           derive_seed(unit_seed, {5, m, 2}));
            model.standardizer = split_std;
            st.test_pred = predict(model, x_test_std);
            st.ok = true;
        } catch (const Error& e) {
            st.ok = false;
            st.error = e.what();
        }
    }

    // Candidate records.
    for (std::size_t m = 0; m < config.candidates.size(); ++m) {
        const auto& st = states[m];
        if (!st.ok) {
            emit(config.candidates[m].id, missing, false, st.error);
            continue;
        }
        const double value = classification ? metric_accuracy(st.test_pred.labels, y_test.labels)
                                            : metric_rmse(st.test_pred.values, y_test.y);
        emit(config.candidates[m].id, value, true, "");
    }

    // Merge surviving candidates into one OOF matrix for the meta-learners.
    std::vector<int> alive;
    for (std::size_t m = 0; m < states.size(); ++m)
        if (states[m].ok) alive.push_back(static_cast<int>(m));

    OofPredictions oof;
    std::vector<Prediction> test_preds;
    if (!alive.empty()) {
        const int block = classification ? targets.n_classes : 1;
        oof.split_id = key.split_id;
        oof.row_ids = states[static_cast<std::size_t>(alive[0])].oof.row_ids;
        oof.fold_of_row = states[static_cast<std::size_t>(alive[0])].oof.fold_of_row;
        oof.n_classes = classification ? targets.n_classes : 0;
        oof.values.resize(static_cast<Eigen::Index>(oof.row_ids.size()),
                          static_cast<Eigen::Index>(alive.size()) * block);
        for (std::size_t a = 0; a < alive.size(); ++a) {
            const auto& st = states[static_cast<std::size_t>(alive[a])];
            oof.candidate_ids.push_back(config.candidates[static_cast<std::size_t>(alive[a])].id);
            oof.values.block(0, static_cast<Eigen::Index>(a) * block, oof.values.rows(), block) =
                st.oof.values;
            test_preds.push_back(st.test_pred);
        }
    }

    Vector y_oof;
    if (!classification && !alive.empty()) {
        y_oof.resize(static_cast<Eigen::Index>(oof.row_ids.size()));
        for (std::size_t i = 0; i < oof.row_ids.size(); ++i)
            y_oof[static_cast<Eigen::Index>(i)] = targets.y[oof.row_ids[i]];
    }
    std::vector<int> labels_oof;
    if (classification && !alive.empty())
        for (int r : oof.row_ids) labels_oof.push_back(targets.labels[static_cast<std::size_t>(r)]);

    // Ensemble records.
    for (const auto& ens : config.ensembles) {
        if (alive.empty()) {
            emit(ens, missing, false, "no surviving candidates");
            continue;
        }
        try {
            const MetaKind kind = parse_meta_kind(ens);
            Prediction blended;
            if (kind == MetaKind::model_average) {
                blended = model_average(test_preds);
            } else if (kind == MetaKind::majority_vote) {
                blended = majority_vote(test_preds, targets.n_classes);
            } else if (classification) {
                if (kind != MetaKind::nonneg)
                    throw ConfigError("ensemble " + ens + " is regression-only");
                const MetaCoefficients meta =
                    fit_meta_classification(oof, labels_oof, MetaKind::nonneg_logistic);
                blended = blend(meta, test_preds);
            } else {
                const MetaCoefficients meta =
                    fit_meta_regression(oof, y_oof, kind, derive_seed(unit_seed, {9}));
                blended = blend(meta, test_preds);
            }
            const double value = classification
                                     ? metric_accuracy(blended.labels, y_test.labels)
                                     : metric_rmse(blended.values, y_test.y);
            emit(ens, value, true, "");
        } catch (const Error& e) {
            emit(ens, missing, false, e.what());
        }
    }
    return out;
}

}  // namespace

BenchmarkResult run_benchmark(const SpectraDataset& data, const BenchmarkConfig& config,
                              const SplitPlan* plan_override) {
    const bool classification = config.task == Task::classification;
    if (classification && !data.has_labels())
        throw ConfigError("classification benchmark needs a label column");
    if (!classification && data.traits.cols() == 0)
        throw ConfigError("regression benchmark needs at least one trait column");

    SplitPlan plan;
    if (plan_override) {
        plan = *plan_override;
    } else {
        plan = make_random_splits(data.n_samples(), config.n_splits, config.train_fraction,
                                  classification ? &data.labels : nullptr,
                                  static_cast<int>(data.classes.size()), config.master_seed);
    }

    const int n_traits = classification ? 1 : static_cast<int>(data.traits.cols());
    std::vector<UnitKey> units;
    for (int t = 0; t < n_traits; ++t)
        for (int s = 0; s < plan.n_splits(); ++s)
            units.push_back({classification ? -1 : t, s});

    std::vector<UnitOutput> outputs(units.size());
    parallel_for(static_cast<int>(units.size()), config.jobs, [&](int i) {
        outputs[static_cast<std::size_t>(i)] =
            run_unit(data, config, plan, units[static_cast<std::size_t>(i)]);
    });

    BenchmarkResult result;
    for (const auto& unit : outputs) {
        result.records.insert(result.records.end(), unit.records.begin(), unit.records.end());
        result.statuses.insert(result.statuses.end(), unit.statuses.begin(), unit.statuses.end());
    }
    for (const auto& st : result.statuses)
        if (!st.ok) ++result.failures;

    // External candidates join as peers: metric per split from their test
    // predictions.
    for (const auto& ext : config.external) {
        for (int s = 0; s < plan.n_splits(); ++s) {
            const Split& split = plan.splits[static_cast<std::size_t>(s)];
            const auto& preds = ext.by_split[static_cast<std::size_t>(s)];
            for (int t = 0; t < n_traits; ++t) {
                const std::string trait_id =
                    classification ? (data.label_name.empty() ? "label" : data.label_name)
                                   : data.trait_names[static_cast<std::size_t>(t)];
                PerformanceRecord rec;
                rec.split_id = s;
                rec.model_id = ext.id;
                rec.trait_id = trait_id;
                rec.metric = classification ? "acc" : "rmse";
                if (classification) {
                    std::vector<int> pred_labels, obs;
                    for (int r : split.test) {
                        const Vector& v = preds.at(r);
                        int best = 0;
                        for (int k2 = 1; k2 < v.size(); ++k2)
                            if (v[k2] > v[best]) best = k2;
                        pred_labels.push_back(best);
                        obs.push_back(data.labels[static_cast<std::size_t>(r)]);
                    }
                    rec.value = metric_accuracy(pred_labels, obs);
                } else {
                    Vector pv(split.test.size()), ov(split.test.size());
                    double mean = 0, sd = 1;
                    Matrix ym = data.traits.col(t);
                    const Standardizer ystd = fit_standardizer(ym, split.train, "trait");
                    mean = ystd.means[0];
                    sd = ystd.sds[0];
                    for (std::size_t i = 0; i < split.test.size(); ++i) {
                        pv[static_cast<Eigen::Index>(i)] = preds.at(split.test[i])[0];
                        ov[static_cast<Eigen::Index>(i)] =
                            (data.traits(split.test[i], t) - mean) / sd;
                    }
                    rec.value = metric_rmse(pv, ov);
                }
                result.records.push_back(std::move(rec));
                result.statuses.push_back({s, ext.id, result.records.back().trait_id, true, ""});
            }
        }
    }

    // Deterministic record order: trait, then split, then roster order.
    std::map<std::string, int> model_order;
    int order = 0;
    for (const auto& c : config.candidates) model_order[c.id] = order++;
    for (const auto& e : config.external) model_order[e.id] = order++;
    for (const auto& e : config.ensembles) model_order[e] = order++;
    std::map<std::string, int> trait_order;
    order = 0;
    if (classification) {
        trait_order[data.label_name.empty() ? "label" : data.label_name] = 0;
    } else {
        for (const auto& t : data.trait_names) trait_order[t] = order++;
    }
    auto sort_key = [&](const PerformanceRecord& r) {
        return std::make_tuple(trait_order.at(r.trait_id), r.split_id, model_order.at(r.model_id));
    };
    std::stable_sort(result.records.begin(), result.records.end(),
                     [&](const PerformanceRecord& a, const PerformanceRecord& b) {
                         return sort_key(a) < sort_key(b);
                     });
    std::stable_sort(result.statuses.begin(), result.statuses.end(),
                     [&](const CellStatus& a, const CellStatus& b) {
                         return std::make_tuple(trait_order.at(a.trait_id), a.split_id,
                                                model_order.at(a.model_id)) <
                                std::make_tuple(trait_order.at(b.trait_id), b.split_id,
                                                model_order.at(b.model_id));
                     });
    return result;
}

std::string performance_table_to_csv(const std::vector<PerformanceRecord>& records) {
    std::ostringstream out;
    out << "split_id,model_id,trait_id,metric,value\n";
    for (const auto& r : records)
        out << r.split_id << ',' << r.model_id << ',' << r.trait_id << ',' << r.metric << ','
            << fmt_double(r.value) << '\n';
    return out.str();
}

std::vector<PerformanceRecord> performance_table_from_csv(const std::string& path) {
    const CsvTable csv = read_csv(path);
    const int c_split = csv.col("split_id"), c_model = csv.col("model_id"),
              c_trait = csv.col("trait_id"), c_metric = csv.col("metric"),
              c_value = csv.col("value");
    if (c_split < 0 || c_model < 0 || c_trait < 0 || c_metric < 0 || c_value < 0)
        throw DataError(path + ": expected header split_id,model_id,trait_id,metric,value");
    std::vector<PerformanceRecord> records;
    for (const auto& row : csv.rows) {
        PerformanceRecord r;
        r.split_id = static_cast<int>(parse_double(row[static_cast<std::size_t>(c_split)], "split_id"));
        r.model_id = row[static_cast<std::size_t>(c_model)];
        r.trait_id = row[static_cast<std::size_t>(c_trait)];
        r.metric = row[static_cast<std::size_t>(c_metric)];
        const std::string& v = row[static_cast<std::size_t>(c_value)];
        r.value = v.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(v, "value");
        records.push_back(std::move(r));
    }
    return records;
}

std::string manifest_text(const Config& cfg, const BenchmarkResult& result) {
    std::ostringstream out;
    out << "config_hash = " << cfg.hash() << '\n';
    out << "master_seed = " << cfg.get_string("seed", "0") << '\n';
    out << "records = " << result.records.size() << '\n';
    out << "failures = " << result.failures << '\n';
    for (const auto& st : result.statuses)
        out << "cell trait=" << st.trait_id << " split=" << st.split_id << " model=" << st.model_id
            << " status=" << (st.ok ? "ok" : "failed") << (st.ok ? "" : " " + st.message) << '\n';
    return out.str();
}

}  // namespace specstack
