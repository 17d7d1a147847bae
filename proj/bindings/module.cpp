#include "specstack/config.hpp"
#include "specstack/csv.hpp"
#include "specstack/cv_harness.hpp"
#include "specstack/data_pipeline.hpp"
#include "specstack/feature_selection.hpp"
#include "specstack/lme.hpp"
#include "specstack/models.hpp"
#include "specstack/stacking.hpp"
#include "specstack/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace specstack;

namespace {

Targets make_targets(Task task, const py::object& y, int n_classes) {
    Targets t;
    t.task = task;
    if (task == Task::regression) {
        t.y = y.cast<Vector>();
    } else {
        t.labels = y.cast<std::vector<int>>();
        t.n_classes = n_classes;
    }
    return t;
}

Hyperparams to_hyperparams(const py::dict& d) {
    Hyperparams h;
    for (auto item : d) h[item.first.cast<std::string>()] = item.second.cast<double>();
    return h;
}

py::dict prediction_to_dict(const Prediction& p) {
    py::dict out;
    if (p.values.size() > 0) out["values"] = p.values;
    if (p.probs.size() > 0) {
        out["probs"] = p.probs;
        out["labels"] = p.labels;
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_specstack, m) {
    m.doc() = "spectral stacking-ensemble benchmark core";

    py::register_exception<Error>(m, "SpecstackError");

    // ---- preprocessing ----
    m.def("to_absorbance", [](const Matrix& transmittance) {
        Matrix out = transmittance;
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            for (Eigen::Index j = 0; j < out.cols(); ++j) {
                if (out(i, j) <= 0) throw DataError("non-positive transmittance");
                out(i, j) = std::log10(1.0 / out(i, j));
            }
        return out;
    }, py::arg("transmittance"), "log10(1/T) per cell");

    m.def("sample_skewness", &sample_skewness, py::arg("x"));

    m.def("standardize_fit", [](const Matrix& X, const IndexSet& rows) {
        const Standardizer s = fit_standardizer(X, rows);
        return py::make_tuple(s.means, s.sds);
    }, py::arg("X"), py::arg("rows"));

    m.def("standardize_apply", [](const Matrix& X, const Vector& means, const Vector& sds) {
        Standardizer s;
        s.means = means;
        s.sds = sds;
        return apply_standardizer(s, X);
    }, py::arg("X"), py::arg("means"), py::arg("sds"));

    // ---- feature selection ----
    m.def("fisher_scores", [](const Matrix& X, const std::vector<int>& labels, int n_classes) {
        return fisher_scores(X, labels, n_classes).scores;
    }, py::arg("X"), py::arg("labels"), py::arg("n_classes"));

    m.def("select_top_k", [](const Vector& scores, int k) {
        FisherScores fs;
        fs.scores = scores;
        return select_top_k(fs, k);
    }, py::arg("scores"), py::arg("k"));

    m.def("ga_select", [](const Matrix& X, const std::vector<int>& labels, int n_classes,
                          const py::dict& options) {
        GaConfig cfg;
        if (options.contains("population_size"))
            cfg.population_size = options["population_size"].cast<int>();
        if (options.contains("generations")) cfg.generations = options["generations"].cast<int>();
        if (options.contains("crossover_rate"))
            cfg.crossover_rate = options["crossover_rate"].cast<double>();
        if (options.contains("mutation_rate"))
            cfg.mutation_rate = options["mutation_rate"].cast<double>();
        if (options.contains("elitism")) cfg.elitism = options["elitism"].cast<int>();
        if (options.contains("fitness_folds"))
            cfg.fitness_folds = options["fitness_folds"].cast<int>();
        if (options.contains("seed")) cfg.seed = options["seed"].cast<std::uint64_t>();
        return ga_select(X, labels, n_classes, cfg);
    }, py::arg("X"), py::arg("labels"), py::arg("n_classes"), py::arg("options") = py::dict());

    // ---- cross-validation ----
    m.def("make_random_splits", [](int n_rows, int n_splits, double train_fraction,
                                   const py::object& labels, int n_classes, std::uint64_t seed) {
        std::vector<int> lab;
        const std::vector<int>* ptr = nullptr;
        if (!labels.is_none()) {
            lab = labels.cast<std::vector<int>>();
            ptr = &lab;
        }
        const SplitPlan plan = make_random_splits(n_rows, n_splits, train_fraction, ptr,
                                                  n_classes, seed);
        py::list out;
        for (const auto& s : plan.splits) out.append(py::make_tuple(s.train, s.test));
        return out;
    }, py::arg("n_rows"), py::arg("n_splits"), py::arg("train_fraction") = 0.75,
       py::arg("labels") = py::none(), py::arg("n_classes") = 0, py::arg("seed") = 0);

    m.def("make_kfold", [](const IndexSet& rows, int k, std::uint64_t seed) {
        return make_kfold(rows, k, nullptr, seed);
    }, py::arg("rows"), py::arg("k"), py::arg("seed") = 0);

    m.def("rmse", &metric_rmse, py::arg("pred"), py::arg("obs"));
    m.def("accuracy", &metric_accuracy, py::arg("pred"), py::arg("obs"));

    // ---- candidate models ----
    py::class_<TrainedModel>(m, "Model")
        .def_property_readonly("kind", [](const TrainedModel& tm) { return kind_name(tm.kind); })
        .def_property_readonly("params", [](const TrainedModel& tm) {
            py::dict d;
            for (const auto& [k, v] : tm.params) d[py::str(k)] = v;
            return d;
        })
        .def("predict", [](const TrainedModel& tm, const Matrix& X) {
            return prediction_to_dict(predict(tm, X));
        }, py::arg("X"))
        .def("lda_project", [](const TrainedModel& tm, const Matrix& X) {
            return lda_project(tm, X);
        }, py::arg("X"));

    m.def("fit_model", [](const std::string& kind, const std::string& task, const Matrix& X,
                          const py::object& y, const py::dict& params, int n_classes,
                          std::uint64_t seed) {
        const Task t = parse_task(task);
        return fit_model(parse_kind(kind), t, X, make_targets(t, y, n_classes),
                         to_hyperparams(params), seed);
    }, py::arg("kind"), py::arg("task"), py::arg("X"), py::arg("y"),
       py::arg("params") = py::dict(), py::arg("n_classes") = 0, py::arg("seed") = 0);

    // ---- stacking ----
    m.def("nnls", [](const Matrix& A, const Vector& b) { return nnls(A, b).x; },
          py::arg("A"), py::arg("b"), "non-negative least squares (Lawson-Hanson)");

    m.def("stack_regression", [](const Matrix& oof_values, const Vector& y,
                                 const std::string& kind,
                                 const std::vector<std::string>& candidate_ids,
                                 std::uint64_t seed) {
        OofPredictions oof;
        oof.values = oof_values;
        oof.candidate_ids = candidate_ids.empty()
                                ? std::vector<std::string>(static_cast<std::size_t>(oof_values.cols()), "m")
                                : candidate_ids;
        const MetaCoefficients meta = fit_meta_regression(oof, y, parse_meta_kind(kind), seed);
        py::dict out;
        out["kind"] = meta_kind_name(meta.kind);
        if (meta.weights.size() > 0) out["weights"] = meta.weights;
        out["intercept"] = meta.intercept;
        return out;
    }, py::arg("oof"), py::arg("y"), py::arg("kind") = "nonneg",
       py::arg("candidate_ids") = std::vector<std::string>{}, py::arg("seed") = 0);

    m.def("fit_nonneg_logistic", [](const Matrix& features, const std::vector<int>& labels,
                                    int n_classes) {
        const NonnegLogisticFit fit = fit_nonneg_logistic(features, labels, n_classes);
        py::dict out;
        out["weights"] = fit.weights;
        out["intercepts"] = fit.intercepts;
        out["objective"] = fit.objective;
        out["converged"] = fit.converged;
        return out;
    }, py::arg("features"), py::arg("labels"), py::arg("n_classes"));

    // ---- mixed model ----
    m.def("fit_lme", [](const std::vector<double>& value,
                        const std::vector<std::string>& algorithm,
                        const std::vector<std::string>& split,
                        const std::vector<std::string>& trait) {
        LmeData data;
        data.value = value;
        data.algorithm = algorithm;
        data.split = split;
        data.trait = trait;
        const LmeFit fit = fit_lme(data);
        py::dict out;
        out["sigma2_split"] = fit.sigma2_split;
        out["sigma2_resid"] = fit.sigma2_resid;
        out["reml_loglik"] = fit.reml_loglik;
        out["df"] = fit.df;
        out["n_obs"] = fit.n_obs;
        out["variance_ratio"] = fit.sigma2_resid > 0
                                    ? std::sqrt(fit.sigma2_split / fit.sigma2_resid)
                                    : 0.0;
        py::list effects;
        for (const auto& e : algorithm_effects(fit)) {
            py::dict ed;
            ed["algorithm"] = e.algorithm;
            ed["estimate"] = e.estimate;
            ed["lower"] = e.lower;
            ed["upper"] = e.upper;
            effects.append(ed);
        }
        out["effects"] = effects;
        py::list contrasts;
        if (fit.algorithms.size() > 1)
            for (const auto& c : posthoc_pairwise(fit)) {
                py::dict cd;
                cd["a"] = c.a;
                cd["b"] = c.b;
                cd["difference"] = c.difference;
                cd["p_holm"] = c.p_holm;
                cd["significant"] = c.significant;
                contrasts.append(cd);
            }
        out["contrasts"] = contrasts;
        return out;
    }, py::arg("value"), py::arg("algorithm"), py::arg("split"),
       py::arg("trait") = std::vector<std::string>{});

    // ---- synthetic data ----
    m.def("synth_regression_csv", [](int n, int p, int traits, std::uint64_t seed) {
        SynthRegressionParams params;
        params.n = n;
        params.p = p;
        params.n_traits = traits;
        params.seed = seed;
        return synth_to_transmittance_csv(synth_regression(params));
    }, py::arg("n") = 200, py::arg("p") = 80, py::arg("traits") = 1, py::arg("seed") = 1);
}
