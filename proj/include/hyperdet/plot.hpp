#pragma once

#include <string>

#include "hyperdet/shap.hpp"

namespace hyperdet {

/// Renders a horizontal bar chart of mean |SHAP| per feature (most important
/// at the top) as a standalone SVG document. The output is deterministic:
/// fixed canvas, coordinates formatted with three decimals.
std::string render_summary_svg(const SummaryData& summary, const std::string& title);

/// Renders a dependence scatter plot (feature value on x, SHAP value on y)
/// as a standalone SVG document.
std::string render_dependence_svg(const DependenceData& data, const std::string& title);

}  // namespace hyperdet
