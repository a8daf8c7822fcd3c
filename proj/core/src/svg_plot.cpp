#include "inhand/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "inhand/errors.hpp"

namespace inhand::harness {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
                          "#aec7e8", "#98df8a"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& y_label,
                              const std::vector<double>& t, const std::vector<Series>& series) {
  if (t.empty() || series.empty()) throw EmptyLog();
  const double width = 760, height = 420;
  const double ml = 70, mr = 150, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double tmin = t.front(), tmax = t.back();
  if (tmax <= tmin) tmax = tmin + 1.0;
  double ymin = 0.0, ymax = 0.0;
  for (const auto& s : series) {
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (ymax - ymin < 1e-12) {
    ymax += 1.0;
    ymin -= 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return ml + (x - tmin) / (tmax - tmin) * pw; };
  auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // frame and ticks
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double tv = tmin + (tmax - tmin) * k / 5.0;
    const double yv = ymin + (ymax - ymin) * k / 5.0;
    svg << "<line x1=\"" << num(px(tv)) << "\" y1=\"" << mt + ph << "\" x2=\"" << num(px(tv))
        << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(px(tv)) << "\" y=\"" << mt + ph + 20
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << num(tv)
        << "</text>\n";
    svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << num(py(yv)) << "\" x2=\"" << ml
        << "\" y2=\"" << num(py(yv)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << num(py(yv) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << num(yv)
        << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">t (s)</text>\n";
  svg << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << 18 << " " << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  // series
  const size_t stride = std::max<size_t>(1, t.size() / 2000);
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 12];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (size_t k = 0; k < t.size(); k += stride) {
      svg << num(px(t[k])) << "," << num(py(series[s].y[k])) << " ";
    }
    if ((t.size() - 1) % stride != 0) {
      svg << num(px(t.back())) << "," << num(py(series[s].y.back()));
    }
    svg << "\"/>\n";
    const double ly = mt + 16.0 * (s + 1);
    svg << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 30
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << ml + pw + 35 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << series[s].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::string> emit_plots(const TimeSeriesLog& log, const std::string& out_dir) {
  if (log.rows.empty()) throw EmptyLog();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const auto t = log.times();
  std::vector<std::string> written;

  auto write = [&](const std::string& name, const std::string& content) {
    const std::string path = out_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    written.push_back(path);
  };

  std::vector<Series> pos(3), ori(3);
  const char* pos_names[] = {"e_1 (x)", "e_2 (y)", "e_3 (z)"};
  const char* ori_names[] = {"e_4", "e_5", "e_6"};
  for (int c = 0; c < 3; ++c) {
    pos[c].label = pos_names[c];
    ori[c].label = ori_names[c];
    for (const auto& r : log.rows) {
      pos[c].y.push_back(r.e[c]);
      ori[c].y.push_back(r.e[3 + c]);
    }
  }
  write("position_error.svg", render_line_chart("Position error", "e (m)", t, pos));
  write("orientation_error.svg",
        render_line_chart("Orientation error", "e (gamma units)", t, ori));

  std::vector<Series> torque(log.m);
  for (int c = 0; c < log.m; ++c) {
    torque[c].label = "u_" + std::to_string(c + 1);
    for (const auto& r : log.rows) torque[c].y.push_back(c < r.u.size() ? r.u[c] : 0.0);
  }
  write("torque.svg", render_line_chart("Joint torque", "u (N m)", t, torque));
  return written;
}

}  // namespace inhand::harness
