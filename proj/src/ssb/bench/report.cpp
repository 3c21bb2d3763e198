#include "ssb/bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssb/errors.hpp"

namespace ssb::bench {

namespace {

// one fixed color per bar series
constexpr const char* kColors[] = {"#4878a8", "#e49444", "#5a9e6f",
                                   "#b65555", "#8a7cc2", "#7b6a55"};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_value(double v) {
  char buf[48];
  if (v != 0.0 && (std::abs(v) < 1e-2 || std::abs(v) >= 1e5))
    std::snprintf(buf, sizeof buf, "%.2e", v);
  else if (v == std::floor(v) && std::abs(v) < 1e5)
    std::snprintf(buf, sizeof buf, "%.0f", v);
  else
    std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<double> values;  // one per group
};

// Grouped bar chart with a log10 y axis. Zero / negative values are drawn as
// a floor-height sliver and annotated literally.
std::string bar_chart(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& groups,
                      const std::vector<Series>& series, bool log_scale,
                      double log_floor) {
  const double width = 720.0, height = 420.0;
  const double ml = 70.0, mr = 20.0, mt = 48.0, mb = 78.0;
  const double plot_w = width - ml - mr, plot_h = height - mt - mb;

  double vmax = 0.0;
  for (const auto& s : series)
    for (double v : s.values) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;

  double lo, hi;  // axis range in plotted units
  if (log_scale) {
    lo = std::log10(log_floor);
    hi = std::ceil(std::log10(vmax) - 1e-12);
    if (hi <= lo) hi = lo + 1.0;
  } else {
    lo = 0.0;
    hi = vmax * 1.08;
  }

  auto y_of = [&](double v) {
    double u = log_scale ? std::log10(std::max(v, log_floor)) : v;
    u = (u - lo) / (hi - lo);
    return mt + plot_h * (1.0 - std::clamp(u, 0.0, 1.0));
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-size=\"16\">" << escape(title) << "</text>\n";

  // y grid + tick labels
  if (log_scale) {
    for (int e = static_cast<int>(std::floor(lo));
         e <= static_cast<int>(hi); ++e) {
      const double y = y_of(std::pow(10.0, e));
      svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(y) << "\" x2=\""
          << fmt(ml + plot_w) << "\" y2=\"" << fmt(y)
          << "\" stroke=\"#dddddd\"/>\n";
      svg << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(y + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double v = hi * i / 4.0;
      const double y = y_of(v);
      svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(y) << "\" x2=\""
          << fmt(ml + plot_w) << "\" y2=\"" << fmt(y)
          << "\" stroke=\"#dddddd\"/>\n";
      svg << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(y + 4)
          << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_value(v)
          << "</text>\n";
    }
  }
  svg << "<text x=\"16\" y=\"" << fmt(mt + plot_h / 2)
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << fmt(mt + plot_h / 2) << ")\">" << escape(y_label) << "</text>\n";

  // bars
  const std::size_t ng = groups.size(), ns = series.size();
  const double group_w = plot_w / static_cast<double>(ng);
  const double bar_w = group_w * 0.72 / static_cast<double>(ns);
  for (std::size_t g = 0; g < ng; ++g) {
    const double gx = ml + group_w * (static_cast<double>(g) + 0.14);
    for (std::size_t s = 0; s < ns; ++s) {
      const double v = series[s].values[g];
      const double x = gx + bar_w * static_cast<double>(s);
      const double y = y_of(v);
      const double y0 = mt + plot_h;
      svg << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
          << fmt(bar_w * 0.92) << "\" height=\"" << fmt(std::max(y0 - y, 1.0))
          << "\" fill=\"" << kColors[s % 6] << "\"/>\n";
      svg << "<text x=\"" << fmt(x + bar_w * 0.46) << "\" y=\"" << fmt(y - 4)
          << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt_value(v)
          << "</text>\n";
    }
    svg << "<text x=\"" << fmt(ml + group_w * (static_cast<double>(g) + 0.5))
        << "\" y=\"" << fmt(mt + plot_h + 16)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(groups[g])
        << "</text>\n";
  }

  // axes
  svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\""
      << fmt(ml) << "\" y2=\"" << fmt(mt + plot_h)
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + plot_h)
      << "\" x2=\"" << fmt(ml + plot_w) << "\" y2=\"" << fmt(mt + plot_h)
      << "\" stroke=\"black\"/>\n";

  // legend
  if (ns > 1) {
    double lx = ml;
    const double ly = height - 22.0;
    for (std::size_t s = 0; s < ns; ++s) {
      svg << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 10)
          << "\" width=\"12\" height=\"12\" fill=\"" << kColors[s % 6]
          << "\"/>\n";
      svg << "<text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly)
          << "\" font-size=\"11\">" << escape(series[s].label) << "</text>\n";
      lx += 24.0 + 7.0 * static_cast<double>(series[s].label.size());
    }
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string render_detection_svg(const ExperimentReport& rep) {
  std::vector<std::string> groups{"energy detector"};
  Series med{"median", {std::max(rep.baseline.p_fd, 0.0)}};
  Series best{"best seed", {std::max(rep.baseline.p_fd, 0.0)}};
  for (const auto& e : rep.entries) {
    groups.push_back(e.name);
    med.values.push_back(e.failed ? 0.0 : e.median_p_fd);
    best.values.push_back(e.failed ? 0.0 : e.min_p_fd);
  }
  // floor two decades under the smallest resolvable probability
  double floor = 1.0;
  for (double v : med.values)
    if (v > 0.0) floor = std::min(floor, v);
  for (double v : best.values)
    if (v > 0.0) floor = std::min(floor, v);
  floor = std::pow(10.0, std::floor(std::log10(floor)) - 1.0);
  return bar_chart("Missed-detection probability at matched false-alarm rate",
                   "P_fd", groups, {med, best}, true, floor);
}

std::string render_ops_svg(const ExperimentReport& rep) {
  std::vector<std::string> groups;
  Series ops{"ops per inference", {}};
  for (const auto& e : rep.entries) {
    groups.push_back(e.name);
    ops.values.push_back(static_cast<double>(e.cost.n_op));
  }
  if (groups.empty()) groups.push_back("(none)"), ops.values.push_back(0.0);
  return bar_chart("Inference cost", "operations", groups, {ops}, true, 1.0);
}

std::string render_memory_svg(const ExperimentReport& rep) {
  std::vector<std::string> groups;
  Series peak{"peak", {}}, total{"total", {}};
  for (const auto& e : rep.entries) {
    groups.push_back(e.name);
    peak.values.push_back(static_cast<double>(e.cost.m_peak));
    total.values.push_back(static_cast<double>(e.cost.m_total));
  }
  if (groups.empty()) {
    groups.push_back("(none)");
    peak.values.push_back(0.0);
    total.values.push_back(0.0);
  }
  return bar_chart("Memory footprint", "floats", groups, {peak, total}, true,
                   1.0);
}

void render_figures(const ExperimentReport& rep, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::pair<const char*, std::string> files[] = {
      {"detection.svg", render_detection_svg(rep)},
      {"ops.svg", render_ops_svg(rep)},
      {"memory.svg", render_memory_svg(rep)},
  };
  for (const auto& [name, content] : files) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::trunc);
    if (!f) throw IoError(std::string("cannot write figure: ") + name);
    f << content;
  }
}

}  // namespace ssb::bench
