#pragma once

#include "specstack/cv_harness.hpp"
#include "specstack/lme.hpp"

#include <string>
#include <vector>

namespace specstack {

struct ReportInputs {
    std::vector<EffectEstimate> marginal;  // per-algorithm estimates with CIs
    std::vector<EffectEstimate> cells;     // per (algorithm, trait); may be empty
    std::vector<PairwiseContrast> contrasts;
    std::vector<PerformanceRecord> records;
    std::string metric = "rmse";
};

// Fig-style plots, rendered as self-contained SVG with no timestamps so
// reruns are byte-identical.

// Interaction-style plot: trait on x, one polyline per algorithm with CI
// ribbons. Empty string when there are fewer than 2 traits.
std::string render_interaction_svg(const ReportInputs& in);

// Dot-and-interval plot of marginal algorithm estimates.
std::string render_effects_svg(const ReportInputs& in);

// Per-split metric lines for one trait.
std::string render_split_lines_svg(const ReportInputs& in, const std::string& trait);

std::string render_report_markdown(const ReportInputs& in, bool interaction_included,
                                   const std::string& split_plot_trait);

}  // namespace specstack
