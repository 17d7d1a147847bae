#include "specstack/report.hpp"

#include "specstack/csv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace specstack {

namespace {

const char* palette(std::size_t i) {
    static const char* colors[] = {"#1b6ca8", "#d1495b", "#2e8b57", "#e69f00", "#7b5aa6",
                                   "#00798c", "#a0522d", "#c71585", "#556b2f", "#444444"};
    return colors[i % (sizeof colors / sizeof colors[0])];
}

std::string f(double v) { return fmt_double(v, 6); }

struct Frame {
    double width = 920, height = 520;
    double left = 70, right = 200, top = 30, bottom = 60;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;

    double px(double x) const {
        return left + (x - xmin) / (xmax - xmin) * (width - left - right);
    }
    double py(double y) const {
        return height - bottom - (y - ymin) / (ymax - ymin) * (height - top - bottom);
    }
};

void pad_y(Frame& fr) {
    if (fr.ymax <= fr.ymin) {
        fr.ymin -= 0.5;
        fr.ymax += 0.5;
    }
    const double pad = 0.06 * (fr.ymax - fr.ymin);
    fr.ymin -= pad;
    fr.ymax += pad;
}

std::string svg_open(const Frame& fr, const std::string& title) {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(fr.width) << "\" height=\""
        << f(fr.height) << "\" viewBox=\"0 0 " << f(fr.width) << ' ' << f(fr.height) << "\">\n";
    out << "<style>text{font-family:sans-serif;font-size:12px;fill:#222}"
           ".title{font-size:14px;font-weight:bold}.axis{stroke:#222;stroke-width:1}"
           ".grid{stroke:#ddd;stroke-width:0.5}</style>\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text class=\"title\" x=\"" << f(fr.left) << "\" y=\"18\">" << title << "</text>\n";
    return out.str();
}

void y_axis(std::ostringstream& out, const Frame& fr, const std::string& label) {
    out << "<line class=\"axis\" x1=\"" << f(fr.left) << "\" y1=\"" << f(fr.py(fr.ymin))
        << "\" x2=\"" << f(fr.left) << "\" y2=\"" << f(fr.py(fr.ymax)) << "\"/>\n";
    const int ticks = 6;
    for (int i = 0; i <= ticks; ++i) {
        const double v = fr.ymin + (fr.ymax - fr.ymin) * i / ticks;
        out << "<line class=\"grid\" x1=\"" << f(fr.left) << "\" y1=\"" << f(fr.py(v))
            << "\" x2=\"" << f(fr.width - fr.right) << "\" y2=\"" << f(fr.py(v)) << "\"/>\n";
        out << "<text x=\"" << f(fr.left - 8) << "\" y=\"" << f(fr.py(v) + 4)
            << "\" text-anchor=\"end\">" << fmt_double(v, 4) << "</text>\n";
    }
    out << "<text x=\"16\" y=\"" << f(fr.top + 12) << "\">" << label << "</text>\n";
}

void legend(std::ostringstream& out, const Frame& fr, const std::vector<std::string>& names) {
    const double x = fr.width - fr.right + 16;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double y = fr.top + 16 + 18 * static_cast<double>(i);
        out << "<rect x=\"" << f(x) << "\" y=\"" << f(y - 9) << "\" width=\"12\" height=\"12\" fill=\""
            << palette(i) << "\"/>\n";
        out << "<text x=\"" << f(x + 18) << "\" y=\"" << f(y + 2) << "\">" << names[i]
            << "</text>\n";
    }
}

}  // namespace

std::string render_interaction_svg(const ReportInputs& in) {
    std::set<std::string> trait_set;
    for (const auto& e : in.cells) trait_set.insert(e.trait);
    if (trait_set.size() < 2) return "";
    const std::vector<std::string> traits(trait_set.begin(), trait_set.end());

    std::vector<std::string> algos;
    for (const auto& e : in.marginal) algos.push_back(e.algorithm);

    Frame fr;
    fr.xmin = 0;
    fr.xmax = static_cast<double>(traits.size()) - 1;
    fr.ymin = in.cells.front().lower;
    fr.ymax = in.cells.front().upper;
    for (const auto& e : in.cells) {
        fr.ymin = std::min(fr.ymin, e.lower);
        fr.ymax = std::max(fr.ymax, e.upper);
    }
    pad_y(fr);

    std::map<std::pair<std::string, std::string>, const EffectEstimate*> lookup;
    for (const auto& e : in.cells) lookup[{e.algorithm, e.trait}] = &e;

    std::ostringstream out;
    out << svg_open(fr, "Estimated mean " + in.metric + " by trait with 95% CI");
    y_axis(out, fr, in.metric);
    for (std::size_t t = 0; t < traits.size(); ++t) {
        out << "<text x=\"" << f(fr.px(static_cast<double>(t))) << "\" y=\""
            << f(fr.height - fr.bottom + 18) << "\" text-anchor=\"middle\">" << traits[t]
            << "</text>\n";
    }
    for (std::size_t a = 0; a < algos.size(); ++a) {
        // CI ribbon.
        std::ostringstream ribbon;
        ribbon << "<path fill=\"" << palette(a) << "\" fill-opacity=\"0.12\" stroke=\"none\" d=\"M";
        for (std::size_t t = 0; t < traits.size(); ++t) {
            const auto* e = lookup.at({algos[a], traits[t]});
            ribbon << f(fr.px(static_cast<double>(t))) << ' ' << f(fr.py(e->upper)) << ' '
                   << (t + 1 < traits.size() ? "L" : "");
        }
        for (std::size_t t = traits.size(); t-- > 0;) {
            const auto* e = lookup.at({algos[a], traits[t]});
            ribbon << "L" << f(fr.px(static_cast<double>(t))) << ' ' << f(fr.py(e->lower)) << ' ';
        }
        ribbon << "Z\"/>\n";
        out << ribbon.str();

        out << "<polyline fill=\"none\" stroke=\"" << palette(a) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t t = 0; t < traits.size(); ++t) {
            const auto* e = lookup.at({algos[a], traits[t]});
            out << f(fr.px(static_cast<double>(t))) << ',' << f(fr.py(e->estimate)) << ' ';
        }
        out << "\"/>\n";
    }
    legend(out, fr, algos);
    out << "</svg>\n";
    return out.str();
}

std::string render_effects_svg(const ReportInputs& in) {
    Frame fr;
    fr.height = 80 + 26 * static_cast<double>(in.marginal.size());
    fr.right = 60;
    fr.xmin = in.marginal.front().lower;
    fr.xmax = in.marginal.front().upper;
    for (const auto& e : in.marginal) {
        fr.xmin = std::min(fr.xmin, e.lower);
        fr.xmax = std::max(fr.xmax, e.upper);
    }
    if (fr.xmax <= fr.xmin) {
        fr.xmin -= 0.5;
        fr.xmax += 0.5;
    }
    const double pad = 0.06 * (fr.xmax - fr.xmin);
    fr.xmin -= pad;
    fr.xmax += pad;
    fr.left = 130;

    std::ostringstream out;
    out << svg_open(fr, "Estimated mean " + in.metric + " with 95% CI");
    out << "<line class=\"axis\" x1=\"" << f(fr.left) << "\" y1=\"" << f(fr.height - fr.bottom)
        << "\" x2=\"" << f(fr.width - fr.right) << "\" y2=\"" << f(fr.height - fr.bottom)
        << "\"/>\n";
    const int ticks = 6;
    for (int i = 0; i <= ticks; ++i) {
        const double v = fr.xmin + (fr.xmax - fr.xmin) * i / ticks;
        out << "<text x=\"" << f(fr.px(v)) << "\" y=\"" << f(fr.height - fr.bottom + 18)
            << "\" text-anchor=\"middle\">" << fmt_double(v, 4) << "</text>\n";
        out << "<line class=\"grid\" x1=\"" << f(fr.px(v)) << "\" y1=\"" << f(fr.top) << "\" x2=\""
            << f(fr.px(v)) << "\" y2=\"" << f(fr.height - fr.bottom) << "\"/>\n";
    }
    for (std::size_t i = 0; i < in.marginal.size(); ++i) {
        const auto& e = in.marginal[i];
        const double y = fr.top + 20 + 26 * static_cast<double>(i);
        out << "<text x=\"" << f(fr.left - 8) << "\" y=\"" << f(y + 4)
            << "\" text-anchor=\"end\">" << e.algorithm << "</text>\n";
        out << "<line stroke=\"" << palette(i) << "\" stroke-width=\"2\" x1=\"" << f(fr.px(e.lower))
            << "\" y1=\"" << f(y) << "\" x2=\"" << f(fr.px(e.upper)) << "\" y2=\"" << f(y)
            << "\"/>\n";
        out << "<circle cx=\"" << f(fr.px(e.estimate)) << "\" cy=\"" << f(y) << "\" r=\"4\" fill=\""
            << palette(i) << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_split_lines_svg(const ReportInputs& in, const std::string& trait) {
    std::vector<std::string> algos;
    std::set<int> split_set;
    std::map<std::pair<std::string, int>, double> values;
    for (const auto& r : in.records) {
        if (r.trait_id != trait || std::isnan(r.value)) continue;
        if (std::find(algos.begin(), algos.end(), r.model_id) == algos.end())
            algos.push_back(r.model_id);
        split_set.insert(r.split_id);
        values[{r.model_id, r.split_id}] = r.value;
    }
    if (algos.empty()) throw DataError("report: no records for trait " + trait);
    const std::vector<int> splits(split_set.begin(), split_set.end());

    Frame fr;
    fr.xmin = static_cast<double>(splits.front());
    fr.xmax = static_cast<double>(splits.back());
    if (fr.xmax <= fr.xmin) fr.xmax = fr.xmin + 1;
    bool first = true;
    for (const auto& [key, v] : values) {
        if (first) {
            fr.ymin = fr.ymax = v;
            first = false;
        }
        fr.ymin = std::min(fr.ymin, v);
        fr.ymax = std::max(fr.ymax, v);
    }
    pad_y(fr);

    std::ostringstream out;
    out << svg_open(fr, in.metric + " per random split (" + trait + ")");
    y_axis(out, fr, in.metric);
    out << "<line class=\"axis\" x1=\"" << f(fr.left) << "\" y1=\"" << f(fr.height - fr.bottom)
        << "\" x2=\"" << f(fr.width - fr.right) << "\" y2=\"" << f(fr.height - fr.bottom)
        << "\"/>\n";
    for (int s : splits) {
        out << "<text x=\"" << f(fr.px(static_cast<double>(s))) << "\" y=\""
            << f(fr.height - fr.bottom + 18) << "\" text-anchor=\"middle\">" << s << "</text>\n";
    }
    out << "<text x=\"" << f((fr.left + fr.width - fr.right) / 2) << "\" y=\""
        << f(fr.height - 16) << "\" text-anchor=\"middle\">random split id</text>\n";
    for (std::size_t a = 0; a < algos.size(); ++a) {
        out << "<polyline fill=\"none\" stroke=\"" << palette(a) << "\" stroke-width=\"1.5\" points=\"";
        for (int s : splits) {
            const auto it = values.find({algos[a], s});
            if (it == values.end()) continue;
            out << f(fr.px(static_cast<double>(s))) << ',' << f(fr.py(it->second)) << ' ';
        }
        out << "\"/>\n";
    }
    legend(out, fr, algos);
    out << "</svg>\n";
    return out.str();
}

std::string render_report_markdown(const ReportInputs& in, bool interaction_included,
                                   const std::string& split_plot_trait) {
    std::ostringstream out;
    out << "# Benchmark report\n\n";
    out << "Metric: `" << in.metric << "`\n\n";
    out << "## Estimated mean " << in.metric << " by model (95% CI)\n\n";
    out << "| model | estimate | lower | upper |\n|---|---|---|---|\n";
    for (const auto& e : in.marginal)
        out << "| " << e.algorithm << " | " << fmt_double(e.estimate, 6) << " | "
            << fmt_double(e.lower, 6) << " | " << fmt_double(e.upper, 6) << " |\n";
    out << "\n## Pairwise contrasts (Holm-adjusted)\n\n";
    int significant = 0;
    for (const auto& c : in.contrasts) significant += c.significant ? 1 : 0;
    out << significant << " of " << in.contrasts.size()
        << " pairwise differences significant at 0.05.\n\n";
    out << "| a | b | difference | p (Holm) | significant |\n|---|---|---|---|---|\n";
    for (const auto& c : in.contrasts)
        out << "| " << c.a << " | " << c.b << " | " << fmt_double(c.difference, 6) << " | "
            << fmt_double(c.p_holm, 6) << " | " << (c.significant ? "yes" : "no") << " |\n";
    out << "\n## Figures\n\n";
    if (interaction_included)
        out << "- `interaction.svg`: estimated cell means per trait with CI ribbons\n";
    else
        out << "- interaction plot omitted: fewer than 2 traits in the analysis\n";
    out << "- `effects.svg`: marginal model estimates with 95% CIs\n";
    out << "- `splits.svg`: per-split " << in.metric << " lines (trait: " << split_plot_trait
        << ")\n";
    return out.str();
}

}  // namespace specstack
