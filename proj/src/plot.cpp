#include "spinring/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "spinring/errors.hpp"

namespace spinring::plot {

namespace {

std::string num(double v, const char* fmt = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Axis {
  bool log;
  double lo;
  double hi;
  double pixel_lo;
  double pixel_hi;

  double transform(double v) const { return log ? std::log10(v) : v; }

  double map(double v) const {
    const double t = (transform(v) - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }

  // Tick values in data units: decades on log axes, ~6 round steps otherwise.
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo - 1e-9); e <= hi + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
      return out;
    }
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double step = raw / mag < 2 ? mag : raw / mag < 5 ? 2 * mag : 5 * mag;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
  }

  std::string label(double v) const {
    if (log) return "1e" + num(std::round(std::log10(v)), "%.0f");
    return num(v, "%g");
  }
};

Axis make_axis(bool log, double lo, double hi, double pixel_lo, double pixel_hi) {
  if (log) {
    lo = std::floor(std::log10(lo));
    hi = std::ceil(std::log10(hi));
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {log, lo, hi, pixel_lo, pixel_hi};
}

}  // namespace

ScatterOutput render_scatter(const std::vector<Series>& series, const PlotSpec& spec) {
  if (spec.width < 100 || spec.height < 100) throw InvalidArgument("render_scatter: plot too small");
  ScatterOutput out;

  std::vector<std::vector<std::pair<double, double>>> kept(series.size());
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (const auto& [x, y] : series[s].points) {
      const bool ok = std::isfinite(x) && std::isfinite(y) && (!spec.log_x || x > 0.0) && (!spec.log_y || y > 0.0);
      if (!ok) {
        ++out.dropped;
        continue;
      }
      kept[s].emplace_back(x, y);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    out.plotted += kept[s].size();
  }

  const double left = 90;
  const double right = spec.width - 30;
  const double top = spec.title.empty() ? 30 : 50;
  const double bottom = spec.height - 70;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    svg << "<text x=\"" << num(spec.width / 2.0) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"16\">" << escape(spec.title) << "</text>\n";

  std::ostringstream csv;
  csv << "series,x,y\r\n";

  if (out.plotted > 0) {
    const Axis ax = make_axis(spec.log_x, xmin, xmax, left, right);
    const Axis ay = make_axis(spec.log_y, ymin, ymax, bottom, top);

    svg << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
        << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(right - left)
        << "\" height=\"" << num(bottom - top) << "\"/>\n</g>\n";
    svg << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (double v : ax.ticks()) {
      const double px = ax.map(v);
      svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(px) << "\" y2=\""
          << num(bottom + 5) << "\" stroke=\"black\"/>"
          << "<text x=\"" << num(px) << "\" y=\"" << num(bottom + 20) << "\" text-anchor=\"middle\">"
          << ax.label(v) << "</text>\n";
    }
    for (double v : ay.ticks()) {
      const double py = ay.map(v);
      svg << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(left) << "\" y2=\""
          << num(py) << "\" stroke=\"black\"/>"
          << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << ay.label(v)
          << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << num(spec.height - 25.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << escape(spec.x_label)
        << "</text>\n";
    svg << "<text transform=\"translate(22," << num((top + bottom) / 2) << ") rotate(-90)\" text-anchor=\"middle\""
        << " font-family=\"sans-serif\" font-size=\"14\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
      svg << "<g class=\"series\" data-label=\"" << escape(series[s].label) << "\" fill=\""
          << escape(series[s].color) << "\" fill-opacity=\"0.6\">\n";
      for (const auto& [x, y] : kept[s]) {
        svg << "<circle class=\"marker\" cx=\"" << num(ax.map(x)) << "\" cy=\"" << num(ay.map(y))
            << "\" r=\"3\"/>\n";
        csv << series[s].label << ',' << num(x, "%.17g") << ',' << num(y, "%.17g") << "\r\n";
      }
      svg << "</g>\n";
    }

    svg << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double ly = top + 15 + 18.0 * static_cast<double>(s);
      svg << "<rect x=\"" << num(right - 170) << "\" y=\"" << num(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
          << escape(series[s].color) << "\"/>"
          << "<text x=\"" << num(right - 155) << "\" y=\"" << num(ly + 1) << "\">" << escape(series[s].label)
          << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  out.svg = svg.str();
  out.csv = csv.str();
  return out;
}

}  // namespace spinring::plot
