#pragma once

// Schedule traces as SVG: one panel per level (physical processors first,
// then each virtual level), one lane per row, boxes colored by identity.

#include "runsched/trace.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <string>

namespace runsched {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

// stable, well-spread palette: hues along the golden angle
inline std::string color_for(int key) {
  if (key < 0) return "#e0e0e0";
  const double hue = std::fmod(47.0 + key * 137.50776405, 360.0);
  std::ostringstream s;
  s << "hsl(" << static_cast<int>(hue) << ",62%,64%)";
  return s.str();
}

inline std::string render_svg(const RunTrace& trace, const std::string& title = "") {
  const double H = trace.horizon.to_double();
  const double ml = 64, mr = 16, mt = title.empty() ? 14 : 38;
  const double plot_w = 880;
  const double row_h = 22, axis_h = 22, panel_gap = 16;

  std::map<int, int> rows_at_level;
  rows_at_level[0] = trace.processors;
  for (const auto& iv : trace.intervals) {
    auto& r = rows_at_level[iv.level];
    if (iv.processor + 1 > r) r = iv.processor + 1;
  }

  std::map<int, double> panel_top;
  double y = mt;
  for (const auto& [lvl, rows] : rows_at_level) {
    panel_top[lvl] = y;
    y += rows * row_h + axis_h + panel_gap;
  }
  const double total_h = y;
  const double total_w = ml + plot_w + mr;
  const auto x_of = [&](double t) { return ml + (H > 0 ? t / H : 0) * plot_w; };

  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w << "\" height=\""
      << total_h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!title.empty())
    out << "<text x=\"" << ml << "\" y=\"22\" font-size=\"15\">" << xml_escape(title)
        << "</text>\n";

  // tick step: roughly a dozen round-valued ticks
  double step = 1;
  if (H > 0) {
    const double raw = H / 12.0;
    step = std::pow(10.0, std::floor(std::log10(raw)));
    if (raw / step > 5)
      step *= 10;
    else if (raw / step > 2)
      step *= 5;
    else if (raw / step > 1)
      step *= 2;
  }

  for (const auto& [lvl, rows] : rows_at_level) {
    const double top = panel_top[lvl];
    const double bottom = top + rows * row_h;
    out << "<text x=\"4\" y=\"" << top + 12 << "\" font-size=\"12\">"
        << (lvl == 0 ? std::string("tasks") : "level " + std::to_string(lvl)) << "</text>\n";
    for (int r = 0; r < rows; ++r) {
      out << "<line x1=\"" << ml << "\" y1=\"" << top + (r + 1) * row_h << "\" x2=\""
          << ml + plot_w << "\" y2=\"" << top + (r + 1) * row_h
          << "\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
      if (lvl == 0)
        out << "<text x=\"" << ml - 8 << "\" y=\"" << top + r * row_h + 15
            << "\" text-anchor=\"end\">p" << r << "</text>\n";
    }
    for (double t = 0; t <= H + 1e-9; t += step) {
      out << "<line x1=\"" << x_of(t) << "\" y1=\"" << top << "\" x2=\"" << x_of(t) << "\" y2=\""
          << bottom << "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
      out << "<text x=\"" << x_of(t) << "\" y=\"" << bottom + 14
          << "\" text-anchor=\"middle\" font-size=\"10\">" << t << "</text>\n";
    }
    out << "<rect x=\"" << ml << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\""
        << rows * row_h << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  }

  for (const auto& iv : trace.intervals) {
    const double top = panel_top[iv.level] + iv.processor * row_h;
    const double x1 = x_of(iv.t1.to_double()), x2 = x_of(iv.t2.to_double());
    const int key = iv.level == 0 ? iv.task : iv.node;
    out << "<rect x=\"" << x1 << "\" y=\"" << top + 2 << "\" width=\"" << x2 - x1
        << "\" height=\"" << row_h - 4 << "\" fill=\"" << (iv.idle ? "#e0e0e0" : color_for(key))
        << "\" stroke=\"#333333\" stroke-width=\"0.4\"/>\n";
    if (!iv.idle && x2 - x1 > 16)
      out << "<text x=\"" << (x1 + x2) / 2 << "\" y=\"" << top + row_h / 2 + 4
          << "\" text-anchor=\"middle\" font-size=\"10\">" << key << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace runsched
