#include "purets/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "purets/errors.hpp"
#include "purets/io.hpp"

namespace purets {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                "#9467bd", "#ff7f0e", "#17becf"};
constexpr int kPaletteSize = 6;

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

// Four significant digits, shortest form ("0.3", "1.2e-05").
std::string tick_label(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

std::string px(double v) { return format_double_fixed(v, 2); }

}  // namespace

std::string render_line_chart(const std::vector<PlotSeries>& series,
                              const PlotOptions& opts) {
  if (series.empty()) throw ConfigError("chart needs at least one series");
  for (const auto& s : series) {
    if (s.y.empty()) {
      throw ConfigError("chart series '" + s.label + "' has no data");
    }
    for (double v : s.y) {
      if (!std::isfinite(v)) {
        throw NumericError("chart series '" + s.label +
                           "' contains a non-finite value");
      }
    }
  }
  if (opts.width < 200 || opts.height < 150) {
    throw ConfigError("chart must be at least 200x150");
  }

  bool log_y = opts.log_y;
  if (log_y) {
    for (const auto& s : series) {
      for (double v : s.y) {
        if (v <= 0.0) log_y = false;
      }
    }
  }
  const auto transform = [log_y](double v) {
    return log_y ? std::log10(v) : v;
  };

  std::size_t max_len = 0;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.y.size());
    for (double v : s.y) {
      y_min = std::min(y_min, transform(v));
      y_max = std::max(y_max, transform(v));
    }
  }
  double x_min = opts.x_start;
  double x_max = opts.x_start + static_cast<double>(max_len - 1) * opts.x_step;
  if (x_min == x_max) x_max = x_min + 1.0;
  if (y_min == y_max) {
    y_min -= 1.0;
    y_max += 1.0;
  } else {
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
  }

  const double left = 70.0, right = 20.0, top = 40.0, bottom = 50.0;
  const double w = static_cast<double>(opts.width);
  const double h = static_cast<double>(opts.height);
  const double plot_w = w - left - right;
  const double plot_h = h - top - bottom;
  const auto sx = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * plot_w;
  };
  const auto sy = [&](double y) {
    return top + (y_max - y) / (y_max - y_min) * plot_h;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(opts.width) + "\" height=\"" +
         std::to_string(opts.height) + "\" viewBox=\"0 0 " +
         std::to_string(opts.width) + " " + std::to_string(opts.height) +
         "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + px(w / 2) + "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"16\" text-anchor=\"middle\" fill=\"#202020\">" +
         xml_escape(opts.title) + "</text>\n";

  // Frame.
  svg += "<rect x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" +
         px(plot_w) + "\" height=\"" + px(plot_h) +
         "\" fill=\"none\" stroke=\"#404040\"/>\n";

  // Ticks: five per axis, evenly spaced in screen space.
  for (int k = 0; k <= 4; ++k) {
    const double fx = x_min + (x_max - x_min) * k / 4.0;
    const double gx = sx(fx);
    svg += "<line x1=\"" + px(gx) + "\" y1=\"" + px(top + plot_h) +
           "\" x2=\"" + px(gx) + "\" y2=\"" + px(top + plot_h + 5) +
           "\" stroke=\"#404040\"/>\n";
    svg += "<text x=\"" + px(gx) + "\" y=\"" + px(top + plot_h + 20) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\" fill=\"#202020\">" +
           tick_label(fx) + "</text>\n";

    const double fy = y_min + (y_max - y_min) * k / 4.0;
    const double gy = sy(fy);
    const double label_v = log_y ? std::pow(10.0, fy) : fy;
    svg += "<line x1=\"" + px(left - 5) + "\" y1=\"" + px(gy) + "\" x2=\"" +
           px(left) + "\" y2=\"" + px(gy) + "\" stroke=\"#404040\"/>\n";
    svg += "<text x=\"" + px(left - 8) + "\" y=\"" + px(gy + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"end\" fill=\"#202020\">" +
           tick_label(label_v) + "</text>\n";
  }

  svg += "<text x=\"" + px(left + plot_w / 2) + "\" y=\"" + px(h - 12) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\" fill=\"#202020\">" +
         xml_escape(opts.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + px(top + plot_h / 2) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\" fill=\"#202020\" transform=\"rotate(-90 16 " +
         px(top + plot_h / 2) + ")\">" +
         xml_escape(log_y ? opts.y_label + " (log scale)" : opts.y_label) +
         "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    std::string points;
    for (std::size_t k = 0; k < series[s].y.size(); ++k) {
      const double fx = opts.x_start + static_cast<double>(k) * opts.x_step;
      points += px(sx(fx)) + "," + px(sy(transform(series[s].y[k]))) + " ";
    }
    if (!points.empty()) points.pop_back();
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
  }

  // Legend, top right inside the frame.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    const double ly = top + 16.0 + 16.0 * static_cast<double>(s);
    svg += "<line x1=\"" + px(left + plot_w - 150) + "\" y1=\"" + px(ly) +
           "\" x2=\"" + px(left + plot_w - 126) + "\" y2=\"" + px(ly) +
           "\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + px(left + plot_w - 120) + "\" y=\"" + px(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#202020\">" +
           xml_escape(series[s].label) + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace purets
