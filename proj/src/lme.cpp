#include "specstack/lme.hpp"

#include "specstack/csv.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace specstack {

namespace {

std::vector<std::string> sorted_levels(const std::vector<std::string>& values) {
    std::set<std::string> s(values.begin(), values.end());
    return {s.begin(), s.end()};
}

int level_index(const std::vector<std::string>& levels, const std::string& v) {
    const auto it = std::lower_bound(levels.begin(), levels.end(), v);
    return static_cast<int>(it - levels.begin());
}

// Reference-level dummy coding for algorithm (+ trait + interaction).
struct Design {
    Matrix X;
    std::vector<std::string> column_names;
    std::vector<std::string> algorithms;
    std::vector<std::string> traits;
    bool has_trait_effects = false;
    int interaction_begin = 0;  // first interaction column, or ncol if none

    Eigen::RowVectorXd row_for(const std::string& algo,
                               const std::optional<std::string>& trait) const;
};

Design build_design(const LmeData& data, const std::vector<int>& keep) {
    Design d;
    std::vector<std::string> algo_kept, trait_kept;
    for (int i : keep) {
        algo_kept.push_back(data.algorithm[static_cast<std::size_t>(i)]);
        if (!data.trait.empty()) trait_kept.push_back(data.trait[static_cast<std::size_t>(i)]);
    }
    d.algorithms = sorted_levels(algo_kept);
    if (!trait_kept.empty()) d.traits = sorted_levels(trait_kept);
    d.has_trait_effects = d.traits.size() > 1;

    const int la = static_cast<int>(d.algorithms.size());
    const int lt = d.has_trait_effects ? static_cast<int>(d.traits.size()) : 1;
    const int q = 1 + (la - 1) + (d.has_trait_effects ? (lt - 1) + (la - 1) * (lt - 1) : 0);

    d.column_names.push_back("(intercept)");
    for (int a = 1; a < la; ++a) d.column_names.push_back("algorithm=" + d.algorithms[static_cast<std::size_t>(a)]);
    if (d.has_trait_effects) {
        for (int t = 1; t < lt; ++t) d.column_names.push_back("trait=" + d.traits[static_cast<std::size_t>(t)]);
        for (int a = 1; a < la; ++a)
            for (int t = 1; t < lt; ++t)
                d.column_names.push_back("algorithm=" + d.algorithms[static_cast<std::size_t>(a)] +
                                         ":trait=" + d.traits[static_cast<std::size_t>(t)]);
    }
    d.interaction_begin = 1 + (la - 1) + (d.has_trait_effects ? (lt - 1) : 0);

    d.X = Matrix::Zero(static_cast<int>(keep.size()), q);
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const int i = keep[r];
        const int a = level_index(d.algorithms, data.algorithm[static_cast<std::size_t>(i)]);
        d.X(static_cast<int>(r), 0) = 1.0;
        if (a > 0) d.X(static_cast<int>(r), a) = 1.0;
        if (d.has_trait_effects) {
            const int t = level_index(d.traits, data.trait[static_cast<std::size_t>(i)]);
            const int lt1 = static_cast<int>(d.traits.size()) - 1;
            if (t > 0) d.X(static_cast<int>(r), la + t - 1) = 1.0;
            if (a > 0 && t > 0)
                d.X(static_cast<int>(r), la + lt1 + (a - 1) * lt1 + (t - 1)) = 1.0;
        }
    }
    return d;
}

Eigen::RowVectorXd Design::row_for(const std::string& algo,
                                   const std::optional<std::string>& trait) const {
    const int la = static_cast<int>(algorithms.size());
    const int lt1 = has_trait_effects ? static_cast<int>(traits.size()) - 1 : 0;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(static_cast<int>(column_names.size()));
    const int a = level_index(algorithms, algo);
    if (a >= la || algorithms[static_cast<std::size_t>(a)] != algo)
        throw DataError("effect cell outside design: algorithm " + algo);
    row[0] = 1.0;
    if (a > 0) row[a] = 1.0;
    if (!has_trait_effects) {
        if (trait) throw DataError("effect cell outside design: no trait factor");
        return row;
    }
    if (trait) {
        const int t = level_index(traits, *trait);
        if (t >= static_cast<int>(traits.size()) || traits[static_cast<std::size_t>(t)] != *trait)
            throw DataError("effect cell outside design: trait " + *trait);
        if (t > 0) row[la + t - 1] = 1.0;
        if (a > 0 && t > 0) row[la + lt1 + (a - 1) * lt1 + (t - 1)] = 1.0;
    } else {
        // Equal-weight average over trait levels.
        const double w = 1.0 / static_cast<double>(traits.size());
        for (int t = 1; t < static_cast<int>(traits.size()); ++t) {
            row[la + t - 1] = w;
            if (a > 0) row[la + lt1 + (a - 1) * lt1 + (t - 1)] = w;
        }
    }
    return row;
}

// Group-structured REML machinery. With H = I + gamma Z Z', all the
// quadratic forms reduce to per-group sums.
struct RemlWorkspace {
    Matrix X;
    Vector y;
    std::vector<int> group_of_row;
    std::vector<int> group_sizes;

    Matrix xtx;
    Vector xty;
    double yty = 0.0;
    std::vector<Matrix> sx;  // per group: column-sum outer products pieces
    std::vector<Vector> sx_vec;
    std::vector<double> sy;

    void prepare() {
        const int q = static_cast<int>(X.cols());
        const int g = static_cast<int>(group_sizes.size());
        xtx = X.transpose() * X;
        xty = X.transpose() * y;
        yty = y.squaredNorm();
        sx_vec.assign(static_cast<std::size_t>(g), Vector::Zero(q));
        sy.assign(static_cast<std::size_t>(g), 0.0);
        for (int r = 0; r < X.rows(); ++r) {
            const int i = group_of_row[static_cast<std::size_t>(r)];
            sx_vec[static_cast<std::size_t>(i)] += X.row(r).transpose();
            sy[static_cast<std::size_t>(i)] += y[r];
        }
    }

    struct Profile {
        Vector beta;
        Matrix xhx_inv;
        double rss = 0.0;
        double sigma2 = 0.0;
        double loglik = 0.0;
    };

    // Profiled REML log-likelihood and GLS estimates at a given gamma.
    Profile profile(double gamma) const {
        const int q = static_cast<int>(X.cols());
        const int n = static_cast<int>(X.rows());
        const int g = static_cast<int>(group_sizes.size());

        Matrix xhx = xtx;
        Vector xhy = xty;
        double yhy = yty;
        double logdet_h = 0.0;
        for (int i = 0; i < g; ++i) {
            const auto ni = static_cast<double>(group_sizes[static_cast<std::size_t>(i)]);
            const double c = gamma / (1.0 + gamma * ni);
            xhx.noalias() -= c * sx_vec[static_cast<std::size_t>(i)] *
                             sx_vec[static_cast<std::size_t>(i)].transpose();
            xhy.noalias() -= c * sy[static_cast<std::size_t>(i)] * sx_vec[static_cast<std::size_t>(i)];
            yhy -= c * sy[static_cast<std::size_t>(i)] * sy[static_cast<std::size_t>(i)];
            logdet_h += std::log1p(gamma * ni);
        }

        Profile p;
        Eigen::LDLT<Matrix> ldlt(xhx);
        if (ldlt.info() != Eigen::Success)
            throw NumericError("lme: X'H^-1X decomposition failed");
        p.beta = ldlt.solve(xhy);
        p.rss = std::max(0.0, yhy - p.beta.dot(xhy));
        const double nu = static_cast<double>(n - q);
        p.sigma2 = p.rss / nu;

        double logdet_xhx = 0.0;
        const Vector dvec = ldlt.vectorD();
        for (Eigen::Index i = 0; i < dvec.size(); ++i) {
            if (dvec[i] <= 0) throw NumericError("lme: non-positive pivot in X'H^-1X");
            logdet_xhx += std::log(dvec[i]);
        }

        if (p.sigma2 <= 0) {
            p.loglik = std::numeric_limits<double>::infinity();
        } else {
            p.loglik = -0.5 * (nu * std::log(2.0 * M_PI * p.sigma2) + logdet_h + logdet_xhx + nu);
        }
        p.xhx_inv = ldlt.solve(Matrix::Identity(q, q));
        return p;
    }
};

RemlWorkspace make_workspace(const LmeData& data, const std::vector<int>& keep, const Design& d,
                             std::vector<std::string>* group_levels_out = nullptr) {
    RemlWorkspace w;
    w.X = d.X;
    w.y.resize(static_cast<Eigen::Index>(keep.size()));
    std::vector<std::string> split_kept;
    for (std::size_t r = 0; r < keep.size(); ++r) {
        w.y[static_cast<Eigen::Index>(r)] = data.value[static_cast<std::size_t>(keep[r])];
        split_kept.push_back(data.split[static_cast<std::size_t>(keep[r])]);
    }
    const auto levels = sorted_levels(split_kept);
    if (group_levels_out) *group_levels_out = levels;
    w.group_sizes.assign(levels.size(), 0);
    for (const auto& s : split_kept) {
        const int gidx = level_index(levels, s);
        w.group_of_row.push_back(gidx);
        ++w.group_sizes[static_cast<std::size_t>(gidx)];
    }
    w.prepare();
    return w;
}

std::vector<int> keep_rows(const LmeData& data) {
    if (data.value.size() != data.algorithm.size() || data.value.size() != data.split.size() ||
        (!data.trait.empty() && data.trait.size() != data.value.size()))
        throw DataError("lme: column lengths differ");
    std::vector<int> keep;
    for (std::size_t i = 0; i < data.value.size(); ++i) {
        const double v = data.value[i];
        if (std::isnan(v)) continue;  // failed cells are dropped listwise
        if (!std::isfinite(v)) throw DataError("lme: non-finite response value");
        keep.push_back(static_cast<int>(i));
    }
    if (keep.size() < 3) throw DataError("lme: fewer than 3 usable rows");
    return keep;
}

}  // namespace

LmeData lme_data_from_records(const std::vector<PerformanceRecord>& records) {
    LmeData d;
    std::set<std::string> traits;
    for (const auto& r : records) traits.insert(r.trait_id);
    const bool multi_trait = traits.size() > 1;
    for (const auto& r : records) {
        d.value.push_back(r.value);
        d.algorithm.push_back(r.model_id);
        d.split.push_back(std::to_string(r.split_id));
        if (multi_trait) d.trait.push_back(r.trait_id);
    }
    return d;
}

double reml_profile_loglik(const LmeData& data, double gamma) {
    const auto keep = keep_rows(data);
    const Design d = build_design(data, keep);
    const RemlWorkspace w = make_workspace(data, keep, d);
    return w.profile(gamma).loglik;
}

LmeFit fit_lme(const LmeData& data) {
    const auto keep = keep_rows(data);
    const Design d = build_design(data, keep);

    // Full-rank check with aliased-column names on failure.
    Eigen::ColPivHouseholderQR<Matrix> qr(d.X);
    qr.setThreshold(1e-10);
    if (qr.rank() < d.X.cols()) {
        std::string aliased;
        const auto perm = qr.colsPermutation().indices();
        for (Eigen::Index i = qr.rank(); i < d.X.cols(); ++i) {
            if (!aliased.empty()) aliased += ", ";
            aliased += d.column_names[static_cast<std::size_t>(perm[i])];
        }
        throw DataError("lme: rank-deficient fixed design; aliased columns: " + aliased);
    }

    std::vector<std::string> group_levels;
    RemlWorkspace w = make_workspace(data, keep, d, &group_levels);
    const int g = static_cast<int>(group_levels.size());
    if (g < 2) throw DataError("lme: grouping column needs at least 2 levels");

    LmeFit fit;
    fit.n_obs = static_cast<int>(keep.size());
    fit.n_groups = g;
    fit.dropped_missing = static_cast<int>(data.value.size() - keep.size());
    fit.column_names = d.column_names;
    fit.algorithms = d.algorithms;
    fit.traits = d.traits;
    fit.has_trait_effects = d.has_trait_effects;
    fit.df = fit.n_obs - static_cast<int>(d.X.cols()) - (g - 1);
    if (fit.df < 1) throw DataError("lme: non-positive residual degrees of freedom");

    // Degenerate response: everything identical.
    bool constant = true;
    for (Eigen::Index i = 1; i < w.y.size(); ++i)
        if (w.y[i] != w.y[0]) {
            constant = false;
            break;
        }
    if (constant) {
        fit.beta = Vector::Zero(d.X.cols());
        fit.beta[0] = w.y[0];
        fit.cov_beta = Matrix::Zero(d.X.cols(), d.X.cols());
        fit.sigma2_split = 0.0;
        fit.sigma2_resid = 0.0;
        fit.gamma = 0.0;
        fit.resid_boundary = true;
        fit.reml_loglik = std::numeric_limits<double>::infinity();
        return fit;
    }

    // 1-D profile search on log gamma: coarse scan, golden-section refine,
    // explicit boundary comparison.
    const double lo = std::log(1e-10), hi = std::log(1e10);
    const int n_scan = 96;
    double best_lg = lo;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_scan; ++i) {
        const double lg = lo + (hi - lo) * i / (n_scan - 1);
        const double ll = w.profile(std::exp(lg)).loglik;
        if (ll > best_ll) {
            best_ll = ll;
            best_lg = lg;
        }
    }
    const double span = (hi - lo) / (n_scan - 1);
    double a = best_lg - span, b = best_lg + span;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = w.profile(std::exp(x1)).loglik;
    double f2 = w.profile(std::exp(x2)).loglik;
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = w.profile(std::exp(x2)).loglik;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = w.profile(std::exp(x1)).loglik;
        }
    }
    double gamma = std::exp(0.5 * (a + b));
    double ll_interior = w.profile(gamma).loglik;
    const double ll_zero = w.profile(0.0).loglik;
    if (ll_zero >= ll_interior) {
        gamma = 0.0;
    }

    const auto prof = w.profile(gamma);
    fit.beta = prof.beta;
    fit.sigma2_resid = prof.sigma2;
    fit.sigma2_split = gamma * prof.sigma2;
    fit.gamma = gamma;
    fit.reml_loglik = prof.loglik;
    fit.cov_beta = prof.sigma2 * prof.xhx_inv;
    fit.resid_boundary = prof.sigma2 < 1e-12;
    return fit;
}

namespace {

EffectEstimate make_estimate(const LmeFit& fit, const Eigen::RowVectorXd& row,
                             const std::string& algo, const std::string& trait) {
    EffectEstimate e;
    e.algorithm = algo;
    e.trait = trait;
    e.estimate = row.dot(fit.beta);
    const double var = row * fit.cov_beta * row.transpose();
    e.se = var > 0 ? std::sqrt(var) : 0.0;
    double tq = 0.0;
    if (e.se > 0) {
        const boost::math::students_t dist(static_cast<double>(fit.df));
        tq = boost::math::quantile(dist, 0.975);
    }
    e.lower = e.estimate - tq * e.se;
    e.upper = e.estimate + tq * e.se;
    return e;
}

Design design_view(const LmeFit& fit) {
    Design d;
    d.column_names = fit.column_names;
    d.algorithms = fit.algorithms;
    d.traits = fit.traits;
    d.has_trait_effects = fit.has_trait_effects;
    return d;
}

}  // namespace

EffectEstimate estimate_cell(const LmeFit& fit, const std::string& algorithm,
                             const std::optional<std::string>& trait) {
    const Design d = design_view(fit);
    return make_estimate(fit, d.row_for(algorithm, trait), algorithm, trait.value_or(""));
}

std::vector<EffectEstimate> algorithm_effects(const LmeFit& fit) {
    std::vector<EffectEstimate> out;
    for (const auto& a : fit.algorithms) out.push_back(estimate_cell(fit, a, std::nullopt));
    return out;
}

std::vector<EffectEstimate> cell_effects(const LmeFit& fit) {
    std::vector<EffectEstimate> out;
    if (!fit.has_trait_effects) return out;
    for (const auto& a : fit.algorithms)
        for (const auto& t : fit.traits) out.push_back(estimate_cell(fit, a, t));
    return out;
}

std::vector<PairwiseContrast> posthoc_pairwise(const LmeFit& fit) {
    if (fit.algorithms.size() < 2)
        throw DataError("posthoc_pairwise: factor has fewer than 2 levels");
    const Design d = design_view(fit);

    std::vector<PairwiseContrast> out;
    for (std::size_t i = 0; i < fit.algorithms.size(); ++i)
        for (std::size_t j = i + 1; j < fit.algorithms.size(); ++j) {
            const Eigen::RowVectorXd row =
                d.row_for(fit.algorithms[i], std::nullopt) - d.row_for(fit.algorithms[j], std::nullopt);
            PairwiseContrast c;
            c.a = fit.algorithms[i];
            c.b = fit.algorithms[j];
            c.difference = row.dot(fit.beta);
            const double var = row * fit.cov_beta * row.transpose();
            c.se = var > 0 ? std::sqrt(var) : 0.0;
            if (c.se > 0) {
                c.t = c.difference / c.se;
                const boost::math::students_t dist(static_cast<double>(fit.df));
                c.p_raw = 2.0 * boost::math::cdf(dist, -std::abs(c.t));
            } else {
                c.t = c.difference == 0 ? 0.0 : std::copysign(1e300, c.difference);
                c.p_raw = c.difference == 0 ? 1.0 : 0.0;
            }
            out.push_back(std::move(c));
        }

    // Holm step-down.
    const std::size_t m = out.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return out[a].p_raw < out[b].p_raw; });
    double running = 0.0;
    for (std::size_t rank = 0; rank < m; ++rank) {
        const double adj = std::min(1.0, static_cast<double>(m - rank) * out[order[rank]].p_raw);
        running = std::max(running, adj);
        out[order[rank]].p_holm = running;
        out[order[rank]].significant = running < 0.05;
    }
    return out;
}

double variance_ratio(const LmeFit& fit) {
    if (fit.sigma2_resid <= 0) throw NumericError("variance_ratio: residual variance is zero");
    return std::sqrt(fit.sigma2_split) / std::sqrt(fit.sigma2_resid);
}

WaldTest interaction_wald_test(const LmeFit& fit) {
    WaldTest test;
    if (!fit.has_trait_effects) throw DataError("interaction_wald_test: no interaction block");
    const int la = static_cast<int>(fit.algorithms.size());
    const int lt = static_cast<int>(fit.traits.size());
    const int begin = 1 + (la - 1) + (lt - 1);
    const int q = (la - 1) * (lt - 1);
    test.df1 = q;
    test.df2 = fit.df;

    const Vector block = fit.beta.segment(begin, q);
    const Matrix cov = fit.cov_beta.block(begin, begin, q, q);
    Eigen::LDLT<Matrix> ldlt(cov);
    const Vector solved = ldlt.solve(block);
    test.f_stat = block.dot(solved) / q;
    const boost::math::fisher_f dist(test.df1, test.df2);
    test.p_value = boost::math::cdf(boost::math::complement(dist, std::max(0.0, test.f_stat)));
    return test;
}

std::string effects_to_csv(const std::vector<EffectEstimate>& effects) {
    std::ostringstream out;
    out << "algorithm,trait,estimate,lower,upper,se\n";
    for (const auto& e : effects)
        out << e.algorithm << ',' << e.trait << ',' << fmt_double(e.estimate) << ','
            << fmt_double(e.lower) << ',' << fmt_double(e.upper) << ',' << fmt_double(e.se)
            << '\n';
    return out.str();
}

std::string contrasts_to_csv(const std::vector<PairwiseContrast>& contrasts) {
    std::ostringstream out;
    out << "a,b,difference,se,t,p_raw,p_holm,significant\n";
    for (const auto& c : contrasts)
        out << c.a << ',' << c.b << ',' << fmt_double(c.difference) << ',' << fmt_double(c.se)
            << ',' << fmt_double(c.t) << ',' << fmt_double(c.p_raw) << ',' << fmt_double(c.p_holm)
            << ',' << (c.significant ? 1 : 0) << '\n';
    return out.str();
}

std::vector<EffectEstimate> effects_from_csv(const std::string& path) {
    const CsvTable csv = read_csv(path);
    const int ca = csv.col("algorithm"), ct = csv.col("trait"), ce = csv.col("estimate"),
              cl = csv.col("lower"), cu = csv.col("upper"), cs = csv.col("se");
    if (ca < 0 || ct < 0 || ce < 0 || cl < 0 || cu < 0 || cs < 0)
        throw DataError(path + ": not an effects file");
    std::vector<EffectEstimate> out;
    for (const auto& row : csv.rows) {
        EffectEstimate e;
        e.algorithm = row[static_cast<std::size_t>(ca)];
        e.trait = row[static_cast<std::size_t>(ct)];
        e.estimate = parse_double(row[static_cast<std::size_t>(ce)], "estimate");
        e.lower = parse_double(row[static_cast<std::size_t>(cl)], "lower");
        e.upper = parse_double(row[static_cast<std::size_t>(cu)], "upper");
        e.se = parse_double(row[static_cast<std::size_t>(cs)], "se");
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<PairwiseContrast> contrasts_from_csv(const std::string& path) {
    const CsvTable csv = read_csv(path);
    const int ca = csv.col("a"), cb = csv.col("b"), cd = csv.col("difference"),
              cp = csv.col("p_holm"), cs = csv.col("significant");
    if (ca < 0 || cb < 0 || cd < 0 || cp < 0 || cs < 0)
        throw DataError(path + ": not a contrasts file");
    std::vector<PairwiseContrast> out;
    for (const auto& row : csv.rows) {
        PairwiseContrast c;
        c.a = row[static_cast<std::size_t>(ca)];
        c.b = row[static_cast<std::size_t>(cb)];
        c.difference = parse_double(row[static_cast<std::size_t>(cd)], "difference");
        c.p_holm = parse_double(row[static_cast<std::size_t>(cp)], "p_holm");
        c.significant = row[static_cast<std::size_t>(cs)] == "1";
        out.push_back(std::move(c));
    }
    return out;
}

std::string variance_to_csv(const LmeFit& fit) {
    std::ostringstream out;
    out << "sigma2_split,sigma2_resid,sd_ratio,reml_loglik,n_obs,df,n_groups,dropped_missing\n";
    out << fmt_double(fit.sigma2_split) << ',' << fmt_double(fit.sigma2_resid) << ','
        << fmt_double(fit.sigma2_resid > 0 ? std::sqrt(fit.sigma2_split / fit.sigma2_resid)
                                           : std::numeric_limits<double>::quiet_NaN())
        << ',' << fmt_double(fit.reml_loglik) << ',' << fit.n_obs << ',' << fit.df << ','
        << fit.n_groups << ',' << fit.dropped_missing << '\n';
    return out.str();
}

}  // namespace specstack
