#include "hyperdet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hyperdet {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 150.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 50.0;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string svg_open() {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
           num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n" +
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text_element(double x, double y, const std::string& content,
                         const std::string& anchor, double size) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
           num(size) + "\" text-anchor=\"" + anchor + "\">" + content + "</text>\n";
}

// Short tick label: enough digits to distinguish axis ticks, stable format.
std::string tick_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

std::string render_summary_svg(const SummaryData& summary, const std::string& title) {
    std::string out = svg_open();
    out += text_element(kWidth / 2.0, 28.0, title, "middle", 16.0);

    double max_value = 0.0;
    for (const SummaryFeature& f : summary.features) {
        max_value = std::max(max_value, f.mean_abs_shap);
    }
    if (max_value <= 0.0) max_value = 1.0;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto n = summary.features.size();
    const double slot = n > 0 ? plot_h / static_cast<double>(n) : plot_h;
    const double bar_h = slot * 0.7;

    for (std::size_t i = 0; i < n; ++i) {
        const SummaryFeature& f = summary.features[i];
        const double y = kMarginTop + slot * static_cast<double>(i) + (slot - bar_h) / 2.0;
        const double w = plot_w * f.mean_abs_shap / max_value;
        out += "<rect x=\"" + num(kMarginLeft) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
               "\" height=\"" + num(bar_h) + "\" fill=\"#4878cf\"/>\n";
        out += text_element(kMarginLeft - 8.0, y + bar_h / 2.0 + 4.0, f.name, "end", 12.0);
        out += text_element(kMarginLeft + w + 6.0, y + bar_h / 2.0 + 4.0,
                            tick_label(f.mean_abs_shap), "start", 11.0);
    }
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
           num(kMarginLeft) + "\" y2=\"" + num(kHeight - kMarginBottom) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += text_element(kMarginLeft + plot_w / 2.0, kHeight - 14.0, "mean |SHAP value|",
                        "middle", 13.0);
    out += "</svg>\n";
    return out;
}

std::string render_dependence_svg(const DependenceData& data, const std::string& title) {
    std::string out = svg_open();
    out += text_element(kWidth / 2.0, 28.0, title, "middle", 16.0);

    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -std::numeric_limits<double>::infinity();
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -std::numeric_limits<double>::infinity();
    for (const auto& [xv, yv] : data.points) {
        x_min = std::min(x_min, xv);
        x_max = std::max(x_max, xv);
        y_min = std::min(y_min, yv);
        y_max = std::max(y_max, yv);
    }
    if (data.points.empty()) {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    if (x_max == x_min) {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if (y_max == y_min) {
        y_min -= 0.5;
        y_max += 0.5;
    }

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto sx = [&](double v) {
        return kMarginLeft + plot_w * (v - x_min) / (x_max - x_min);
    };
    const auto sy = [&](double v) {
        return kHeight - kMarginBottom - plot_h * (v - y_min) / (y_max - y_min);
    };

    // Axes along the plot edges, plus a zero line when zero is inside range.
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kHeight - kMarginBottom) +
           "\" x2=\"" + num(kWidth - kMarginRight) + "\" y2=\"" + num(kHeight - kMarginBottom) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(kMarginTop) + "\" x2=\"" +
           num(kMarginLeft) + "\" y2=\"" + num(kHeight - kMarginBottom) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    if (y_min < 0.0 && y_max > 0.0) {
        out += "<line x1=\"" + num(kMarginLeft) + "\" y1=\"" + num(sy(0.0)) + "\" x2=\"" +
               num(kWidth - kMarginRight) + "\" y2=\"" + num(sy(0.0)) +
               "\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
    }

    for (const auto& [xv, yv] : data.points) {
        out += "<circle cx=\"" + num(sx(xv)) + "\" cy=\"" + num(sy(yv)) +
               "\" r=\"2.5\" fill=\"#4878cf\" fill-opacity=\"0.6\"/>\n";
    }

    out += text_element(kMarginLeft - 8.0, kHeight - kMarginBottom + 4.0, tick_label(x_min),
                        "end", 11.0);
    out += text_element(kWidth - kMarginRight, kHeight - kMarginBottom + 18.0, tick_label(x_max),
                        "end", 11.0);
    out += text_element(kMarginLeft - 8.0, kMarginTop + 4.0, tick_label(y_max), "end", 11.0);
    out += text_element(kMarginLeft - 8.0, kHeight - kMarginBottom - 6.0, tick_label(y_min),
                        "end", 11.0);
    out += text_element(kMarginLeft + plot_w / 2.0, kHeight - 14.0, data.feature, "middle", 13.0);
    out += text_element(18.0, kMarginTop - 10.0, "SHAP value", "start", 13.0);
    out += "</svg>\n";
    return out;
}

}  // namespace hyperdet
