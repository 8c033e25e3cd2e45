#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "listpolar/errors.hpp"
#include "listpolar/montecarlo.hpp"

namespace listpolar {

struct Series {
  std::string label;
  std::string colour;
  std::string dash;  // SVG dash pattern, empty for solid
  std::vector<std::pair<double, double>> points;  // (group_b_share, y)
};

struct FigureSpec {
  int figure_id = 1;
  std::string title;
  std::string y_label;
  double reference_y = 0.0;  // horizontal guide line
  std::vector<Series> series;
};

namespace detail {

struct Metric {
  std::string name;
  std::function<double(const ScenarioSummary&)> value;
};

inline std::string mode_label(PolarityMode p, CovariateMode c) {
  return std::string(p == PolarityMode::OppositePolarity ? "Opposite polarity" : "Not sensitive in B") +
         ", " + (c == CovariateMode::SameEffect ? "same x2 effect" : "opposite x2 effect");
}

inline const char* mode_colour(PolarityMode p, CovariateMode c) {
  if (p == PolarityMode::OppositePolarity) {
    return c == CovariateMode::SameEffect ? "#1b6ca8" : "#d1495b";
  }
  return c == CovariateMode::SameEffect ? "#2a9d8f" : "#e9a03b";
}

inline const char* kDashes[] = {"", "6,4", "2,3"};

}  // namespace detail

/// Builds figure 1-4 from summary rows: placebo p-values, prevalence bias,
/// x2 coefficient bias and estimated sensitivity bias against group-B share.
inline FigureSpec make_figure(int figure_id, const std::vector<ScenarioSummary>& rows) {
  FigureSpec fig;
  fig.figure_id = figure_id;
  std::vector<detail::Metric> metrics;
  switch (figure_id) {
    case 1:
      fig.title = "P-values for the joint placebo test";
      fig.y_label = "Mean p-value";
      fig.reference_y = kRejectionLevel;
      metrics = {{"", [](const ScenarioSummary& s) { return s.placebo_p_mean; }}};
      break;
    case 2:
      fig.title = "Bias in the estimated prevalence of the sensitive trait";
      fig.y_label = "Prevalence bias";
      metrics = {{"DiM", [](const ScenarioSummary& s) { return s.dim_bias.mean; }},
                 {"ML", [](const ScenarioSummary& s) { return s.ml_prev_bias.mean; }},
                 {"Combined ML", [](const ScenarioSummary& s) { return s.cml_prev_bias.mean; }}};
      break;
    case 3:
      fig.title = "Bias in the estimated x2 coefficient";
      fig.y_label = "Coefficient bias";
      metrics = {{"ML", [](const ScenarioSummary& s) { return s.ml_b2_bias.mean; }},
                 {"Combined ML", [](const ScenarioSummary& s) { return s.cml_b2_bias.mean; }}};
      break;
    case 4:
      fig.title = "Estimated sensitivity bias (DiM minus direct)";
      fig.y_label = "Estimated sensitivity bias";
      metrics = {{"", [](const ScenarioSummary& s) { return s.sens_bias.mean; }}};
      break;
    default:
      throw InputError("unknown figure id " + std::to_string(figure_id) + " (expected 1-4)");
  }

  for (PolarityMode p : {PolarityMode::OppositePolarity, PolarityMode::NonSensitiveB}) {
    for (CovariateMode c : {CovariateMode::SameEffect, CovariateMode::OppositeEffect}) {
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        Series s;
        s.label = detail::mode_label(p, c);
        if (!metrics[m].name.empty()) s.label = metrics[m].name + ": " + s.label;
        s.colour = detail::mode_colour(p, c);
        s.dash = detail::kDashes[m];
        for (const auto& row : rows) {
          if (row.polarity_mode != p || row.covariate_mode != c) continue;
          const double y = metrics[m].value(row);
          if (std::isfinite(y)) s.points.emplace_back(row.group_b_share, y);
        }
        std::sort(s.points.begin(), s.points.end());
        if (!s.points.empty()) fig.series.push_back(std::move(s));
      }
    }
  }
  return fig;
}

namespace detail {

inline std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round tick spacing (1, 2 or 5 times a power of ten) giving about `target` ticks.
inline double tick_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

}  // namespace detail

/// Hand-emitted SVG line chart. Output is a pure function of the figure.
inline std::string render_svg(const FigureSpec& fig) {
  constexpr double kWidth = 860.0;
  constexpr double kHeight = 480.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 300.0;  // legend column
  constexpr double kTop = 40.0;
  constexpr double kBottom = 60.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_lo = 0.0;
  double x_hi = 0.5;
  double y_lo = fig.reference_y;
  double y_hi = fig.reference_y;
  for (const auto& s : fig.series) {
    for (const auto& [x, y] : s.points) {
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (y_hi - y_lo < 1e-9) {
    y_lo -= 0.05;
    y_hi += 0.05;
  }
  const double y_step = detail::tick_step(y_hi - y_lo, 5);
  y_lo = std::floor(y_lo / y_step) * y_step;
  y_hi = std::ceil(y_hi / y_step) * y_step;

  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"15\">Figure " << fig.figure_id << ": "
     << detail::xml_escape(fig.title) << "</text>\n";

  // Axes and grid.
  os << "<g stroke=\"#cccccc\" stroke-width=\"1\">\n";
  const int y_ticks = static_cast<int>(std::lround((y_hi - y_lo) / y_step));
  for (int i = 0; i <= y_ticks; ++i) {
    const double y = y_lo + i * y_step;
    os << "<line x1=\"" << detail::fmt("%.2f", kLeft) << "\" y1=\"" << detail::fmt("%.2f", py(y))
       << "\" x2=\"" << detail::fmt("%.2f", kLeft + plot_w) << "\" y2=\""
       << detail::fmt("%.2f", py(y)) << "\"/>\n";
  }
  os << "</g>\n<g font-size=\"11\" text-anchor=\"end\">\n";
  for (int i = 0; i <= y_ticks; ++i) {
    const double y = y_lo + i * y_step;
    os << "<text x=\"" << detail::fmt("%.2f", kLeft - 6) << "\" y=\""
       << detail::fmt("%.2f", py(y) + 4) << "\">" << detail::fmt("%.3g", std::abs(y) < 1e-12 ? 0.0 : y)
       << "</text>\n";
  }
  os << "</g>\n<g font-size=\"11\" text-anchor=\"middle\">\n";
  for (int i = 0; i <= 10; ++i) {
    const double x = x_lo + (x_hi - x_lo) * i / 10.0;
    os << "<text x=\"" << detail::fmt("%.2f", px(x)) << "\" y=\""
       << detail::fmt("%.2f", kTop + plot_h + 18) << "\">" << detail::fmt("%.2f", x) << "</text>\n";
  }
  os << "</g>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << detail::fmt("%.2f", plot_w)
     << "\" height=\"" << detail::fmt("%.2f", plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << detail::fmt("%.2f", py(fig.reference_y))
     << "\" x2=\"" << detail::fmt("%.2f", kLeft + plot_w) << "\" y2=\""
     << detail::fmt("%.2f", py(fig.reference_y))
     << "\" stroke=\"#555555\" stroke-dasharray=\"3,3\"/>\n"
     << "<text x=\"" << detail::fmt("%.2f", kLeft + plot_w / 2) << "\" y=\""
     << detail::fmt("%.2f", kHeight - 16) << "\" font-size=\"13\" text-anchor=\"middle\">"
     << "Share of respondents in group B</text>\n"
     << "<text transform=\"translate(18," << detail::fmt("%.2f", kTop + plot_h / 2)
     << ") rotate(-90)\" font-size=\"13\" text-anchor=\"middle\">" << detail::xml_escape(fig.y_label)
     << "</text>\n";

  // Series.
  std::size_t index = 0;
  for (const auto& s : fig.series) {
    os << "<g stroke=\"" << s.colour << "\" fill=\"" << s.colour << "\">\n";
    if (s.points.size() > 1) {
      os << "<polyline fill=\"none\" stroke-width=\"2\"";
      if (!s.dash.empty()) os << " stroke-dasharray=\"" << s.dash << '"';
      os << " points=\"";
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        if (i) os << ' ';
        os << detail::fmt("%.2f", px(s.points[i].first)) << ','
           << detail::fmt("%.2f", py(s.points[i].second));
      }
      os << "\"/>\n";
    }
    for (const auto& [x, y] : s.points) {
      os << "<circle cx=\"" << detail::fmt("%.2f", px(x)) << "\" cy=\"" << detail::fmt("%.2f", py(y))
         << "\" r=\"3\"/>\n";
    }
    // Legend entry.
    const double ly = kTop + 8 + 18.0 * static_cast<double>(index);
    const double lx = kWidth - kRight + 16;
    os << "<line x1=\"" << detail::fmt("%.2f", lx) << "\" y1=\"" << detail::fmt("%.2f", ly)
       << "\" x2=\"" << detail::fmt("%.2f", lx + 24) << "\" y2=\"" << detail::fmt("%.2f", ly)
       << "\" stroke-width=\"2\"";
    if (!s.dash.empty()) os << " stroke-dasharray=\"" << s.dash << '"';
    os << "/>\n<text x=\"" << detail::fmt("%.2f", lx + 30) << "\" y=\""
       << detail::fmt("%.2f", ly + 4) << "\" font-size=\"11\" stroke=\"none\">"
       << detail::xml_escape(s.label) << "</text>\n</g>\n";
    ++index;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace listpolar
