#include "specstack/config.hpp"
#include "specstack/csv.hpp"
#include "specstack/cv_harness.hpp"
#include "specstack/data_pipeline.hpp"
#include "specstack/lme.hpp"
#include "specstack/report.hpp"
#include "specstack/stacking.hpp"
#include "specstack/synth.hpp"
#include "specstack/types.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using namespace specstack;

namespace {

Config load_config(const std::string& path) {
    Config cfg = Config::load(path);
    cfg.apply_env_overrides();
    return cfg;
}

Schema schema_from_config(const Config& cfg) {
    Schema schema;
    for (const auto& entry : cfg.get_list("target_roles", {})) {
        const auto parts = split(entry, ':');
        if (parts.size() != 2)
            throw ConfigError("target_roles entries must be name:role, got " + entry);
        const std::string role = trim(parts[1]);
        if (role == "trait")
            schema[trim(parts[0])] = ColumnRole::trait;
        else if (role == "label")
            schema[trim(parts[0])] = ColumnRole::label;
        else
            throw ConfigError("unknown target role: " + role);
    }
    return schema;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

int cmd_preprocess(const std::string& config_path, std::string out_dir) {
    const Config cfg = load_config(config_path);
    if (out_dir.empty()) out_dir = cfg.get_string("out", ".");
    ensure_dir(out_dir);

    const std::string dataset_path = cfg.get_string("dataset");
    const Schema schema = schema_from_config(cfg);
    const auto regions = cfg.get_intervals("noise_regions", default_noise_regions());
    const double cutoff = cfg.get_double("skewness_cutoff", 1.0);

    RawSpectraTable raw = load_table(dataset_path, schema);
    raw = to_absorbance(raw);
    DropResult dropped = drop_noise_regions(raw, regions);
    SpectraDataset& data = dropped.dataset;

    if (data.traits.cols() > 0) {
        const LogTransformResult lt = log_transform_traits(data.traits, data.trait_names, cutoff);
        data.traits = lt.traits;
        data.trait_logged = lt.flags;
    }

    write_file(out_dir + "/processed.csv", dataset_to_csv(data));

    std::ostringstream prov;
    prov << "source = " << dataset_path << '\n';
    prov << "config_hash = " << cfg.hash() << '\n';
    prov << "wavelengths_removed = " << dropped.removed << '\n';
    prov << "wavelengths_retained = " << dropped.retained << '\n';
    prov << "skewness_cutoff = " << fmt_double(cutoff) << '\n';
    for (std::size_t t = 0; t < data.trait_names.size(); ++t)
        prov << "log_transform." << data.trait_names[t] << " = "
             << (data.trait_logged[t] ? "true" : "false") << '\n';
    write_file(out_dir + "/provenance.txt", prov.str());

    std::cout << "preprocess: " << data.n_samples() << " samples, " << dropped.retained
              << " wavelengths retained (" << dropped.removed << " removed)\n";
    return 0;
}

BenchmarkConfig benchmark_config(const Config& cfg, const SpectraDataset& data,
                                 std::uint64_t seed, int jobs) {
    BenchmarkConfig bc;
    bc.task = parse_task(cfg.get_string("task", data.has_labels() ? "classification" : "regression"));
    bc.n_splits = static_cast<int>(cfg.get_int("splits.n", bc.task == Task::regression ? 50 : 10));
    bc.train_fraction = cfg.get_double("splits.train_fraction", 0.75);
    bc.inner_folds = static_cast<int>(cfg.get_int("splits.inner_folds", 10));
    bc.master_seed = seed;
    bc.jobs = jobs;
    bc.candidates = build_roster(cfg, bc.task, data.n_samples(), data.n_features());
    for (auto& c : bc.candidates) c.seed = derive_seed(seed, {fnv1a64(c.id)});

    const auto default_ens = bc.task == Task::regression ? regression_ensembles()
                                                         : classification_ensembles();
    bc.ensembles = cfg.get_list("ensembles", default_ens);
    std::set<std::string> ids;
    for (const auto& c : bc.candidates) ids.insert(c.id);
    for (const auto& e : bc.ensembles) {
        parse_meta_kind(e);  // rejects unknown names
        if (!ids.insert(e).second) throw ConfigError("duplicate roster name: " + e);
    }

    bc.fisher_top_k = static_cast<int>(cfg.get_int("fs.top_k", 0));
    bc.ga_enabled = cfg.get_bool("ga.enabled", false);
    bc.ga_config = cfg;
    return bc;
}

int cmd_benchmark(const std::string& config_path, std::uint64_t seed_override, bool seed_set,
                  int jobs, std::string out_dir) {
    Config cfg = load_config(config_path);
    if (out_dir.empty()) out_dir = cfg.get_string("out", ".");
    ensure_dir(out_dir);

    const std::string dataset_path = cfg.get_string("dataset");
    const Schema schema = schema_from_config(cfg);
    const SpectraDataset data = dataset_from_csv_file(dataset_path, schema);

    const std::uint64_t seed =
        seed_set ? seed_override : static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    cfg.set("seed", std::to_string(seed));
    BenchmarkConfig bc = benchmark_config(cfg, data, seed, jobs);

    if (cfg.has("external_predictions")) {
        const SplitPlan plan = make_random_splits(
            data.n_samples(), bc.n_splits, bc.train_fraction,
            bc.task == Task::classification ? &data.labels : nullptr,
            static_cast<int>(data.classes.size()), seed);
        bc.external = ingest_external_predictions(
            cfg.get_string("external_predictions"), plan,
            bc.task == Task::classification ? static_cast<int>(data.classes.size()) : 0);
    }

    const BenchmarkResult result = run_benchmark(data, bc);
    write_file(out_dir + "/performance.csv", performance_table_to_csv(result.records));
    write_file(out_dir + "/manifest.txt", manifest_text(cfg, result));

    std::set<std::string> models, traits, splits;
    for (const auto& r : result.records) {
        models.insert(r.model_id);
        traits.insert(r.trait_id);
        splits.insert(std::to_string(r.split_id));
    }
    std::cout << "benchmark: " << result.records.size() << " records (" << models.size()
              << " models x " << splits.size() << " splits x " << traits.size() << " traits), "
              << result.failures << " failures\n";
    return 0;
}

int cmd_analyze(const std::string& table_path, std::string out_dir) {
    if (out_dir.empty()) out_dir = ".";
    ensure_dir(out_dir);

    const auto records = performance_table_from_csv(table_path);
    if (records.empty()) throw DataError(table_path + ": empty performance table");
    const LmeData data = lme_data_from_records(records);
    const LmeFit fit = fit_lme(data);

    std::vector<EffectEstimate> effects = algorithm_effects(fit);
    const auto cells = cell_effects(fit);
    effects.insert(effects.end(), cells.begin(), cells.end());
    const auto contrasts = fit.algorithms.size() > 1 ? posthoc_pairwise(fit)
                                                     : std::vector<PairwiseContrast>{};
    if (fit.algorithms.size() < 2)
        std::cerr << "specstack: warning: single algorithm, contrasts file left empty\n";

    write_file(out_dir + "/estimates.csv", effects_to_csv(effects));
    write_file(out_dir + "/contrasts.csv", contrasts_to_csv(contrasts));
    write_file(out_dir + "/variance.csv", variance_to_csv(fit));

    std::cout << "analyze: " << fit.n_obs << " observations, " << fit.algorithms.size()
              << " algorithms, sigma_split/sigma_resid = "
              << fmt_double(fit.sigma2_resid > 0 ? variance_ratio(fit) : 0.0, 4) << '\n';
    if (fit.has_trait_effects) {
        const WaldTest wald = interaction_wald_test(fit);
        std::cout << "algorithm x trait interaction: F(" << wald.df1 << "," << wald.df2
                  << ") = " << fmt_double(wald.f_stat, 5) << ", p = " << fmt_double(wald.p_value, 4)
                  << '\n';
    }
    if (fit.dropped_missing > 0)
        std::cerr << "specstack: warning: dropped " << fit.dropped_missing << " missing cells\n";
    return 0;
}

int cmd_report(std::string dir, std::string trait) {
    if (dir.empty()) dir = ".";
    ReportInputs in;
    const auto all_effects = effects_from_csv(dir + "/estimates.csv");
    for (const auto& e : all_effects)
        (e.trait.empty() ? in.marginal : in.cells).push_back(e);
    in.contrasts = contrasts_from_csv(dir + "/contrasts.csv");
    in.records = performance_table_from_csv(dir + "/performance.csv");
    if (in.marginal.empty()) throw DataError(dir + ": estimates.csv has no marginal rows");
    if (in.records.empty()) throw DataError(dir + ": performance.csv is empty");
    in.metric = in.records.front().metric;

    std::set<std::string> traits;
    for (const auto& r : in.records) traits.insert(r.trait_id);
    if (trait.empty()) trait = *traits.begin();
    if (!traits.count(trait)) throw ConfigError("unknown trait for split plot: " + trait);

    const std::string interaction = render_interaction_svg(in);
    const bool has_interaction = !interaction.empty();
    if (has_interaction) write_file(dir + "/interaction.svg", interaction);
    write_file(dir + "/effects.svg", render_effects_svg(in));
    write_file(dir + "/splits.svg", render_split_lines_svg(in, trait));
    write_file(dir + "/report.md", render_report_markdown(in, has_interaction, trait));

    std::cout << "report: wrote " << (has_interaction ? 3 : 2) << " figures + report.md to " << dir
              << (has_interaction ? "" : " (interaction plot omitted: single trait)") << '\n';
    return 0;
}

int cmd_synth(const std::string& task, const std::string& out_path, int n, int p, int traits,
              std::uint64_t seed) {
    SpectraDataset data;
    if (task == "regression") {
        SynthRegressionParams params;
        params.n = n;
        params.p = p;
        params.n_traits = traits;
        params.seed = seed;
        data = synth_regression(params);
    } else if (task == "classification") {
        SynthClassificationParams params;
        params.n = n;
        params.p = p;
        params.seed = seed;
        data = synth_classification(params);
    } else {
        throw ConfigError("synth task must be regression or classification");
    }
    write_file(out_path, synth_to_transmittance_csv(data));
    std::cout << "synth: wrote " << data.n_samples() << " samples x " << data.n_features()
              << " wavelengths to " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral stacking-ensemble benchmark suite"};
    app.require_subcommand(1);

    std::string config_path, out_dir, table_path, report_dir, report_trait;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;

    auto* pre = app.add_subcommand("preprocess", "absorbance transform, noise regions, trait transforms");
    pre->add_option("--config", config_path, "run configuration file")->required();
    pre->add_option("--out", out_dir, "output directory");

    auto* bench = app.add_subcommand("benchmark", "random-split candidate + ensemble benchmark");
    bench->add_option("--config", config_path, "run configuration file")->required();
    auto* seed_opt = bench->add_option("--seed", seed, "master seed override");
    bench->add_option("--jobs", jobs, "worker thread cap (outputs are identical for any value)");
    bench->add_option("--out", out_dir, "output directory");

    auto* analyze = app.add_subcommand("analyze", "linear mixed model on a performance table");
    analyze->add_option("--table", table_path, "performance table csv")->required();
    analyze->add_option("--out", out_dir, "output directory");

    auto* report = app.add_subcommand("report", "render SVG figures + markdown from an analysis dir");
    report->add_option("--dir", report_dir, "directory with performance.csv and analysis outputs");
    report->add_option("--trait", report_trait, "trait for the per-split plot");

    std::string synth_task = "regression", synth_out = "synth.csv";
    int synth_n = 200, synth_p = 80, synth_traits = 2;
    std::uint64_t synth_seed = 1;
    auto* synth = app.add_subcommand("synth", "generate a synthetic transmittance dataset");
    synth->add_option("--task", synth_task, "regression|classification");
    synth->add_option("--out", synth_out, "output csv path");
    synth->add_option("--n", synth_n, "samples");
    synth->add_option("--p", synth_p, "wavelengths");
    synth->add_option("--traits", synth_traits, "trait count (regression)");
    synth->add_option("--seed", synth_seed, "generator seed");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        if (pre->parsed()) return cmd_preprocess(config_path, out_dir);
        if (bench->parsed()) return cmd_benchmark(config_path, seed, seed_set, jobs, out_dir);
        if (analyze->parsed()) return cmd_analyze(table_path, out_dir);
        if (report->parsed()) return cmd_report(report_dir, report_trait);
        if (synth->parsed())
            return cmd_synth(synth_task, synth_out, synth_n, synth_p, synth_traits, synth_seed);
    } catch (const ConfigError& e) {
        std::cerr << "specstack: " << e.id() << ": " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "specstack: " << e.id() << ": " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "specstack: " << e.id() << ": " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "specstack: internal: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
