// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.


#include "fhvc/eval/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "fhvc/eval/metrics.hpp"

namespace fhvc::eval {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f.flush()) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const std::string& header) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != header) {
    throw EvalError(path.string() + ": expected header '" + header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw EvalError("bad number '" + s + "'");
  }
  if (pos != s.size()) throw EvalError("bad number '" + s + "'");
  return v;
}

struct Frame {
  double x0, x1, y0, y1;

  double sx(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double sy(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Frame fit_frame(double x0, double x1, double y0, double y1) {
  auto pad = [](double& lo, double& hi) {
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  };
  pad(x0, x1);
  pad(y0, y1);
  return {x0, x1, y0, y1};
}

std::string svg_open(const Frame& fr, const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  const double l = kLeft, r = kWidth - kRight, t = kTop, b = kHeight - kBottom;
  os << "<g stroke=\"#444\" stroke-width=\"1\" fill=\"none\">"
     << "<line x1=\"" << l << "\" y1=\"" << b << "\" x2=\"" << r << "\" y2=\"" << b << "\"/>"
     << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << b << "\"/></g>\n";
  os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#222\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = fr.x0 + (fr.x1 - fr.x0) * k / 4.0;
    const double yv = fr.y0 + (fr.y1 - fr.y0) * k / 4.0;
    char xl[32], yl[32];
    std::snprintf(xl, sizeof xl, "%.3g", xv);
    std::snprintf(yl, sizeof yl, "%.3g", yv);
    os << "<text x=\"" << px(fr.sx(xv)) << "\" y=\"" << px(b + 16) << "\" text-anchor=\"middle\">" << xl << "</text>"
       << "<text x=\"" << px(l - 6) << "\" y=\"" << px(fr.sy(yv) + 4) << "\" text-anchor=\"end\">" << yl << "</text>\n";
  }
  os << "<text x=\"" << px((l + r) / 2) << "\" y=\"" << px(kHeight - 20) << "\" text-anchor=\"middle\">"
     << xml_escape(xlabel) << "</text>\n"
     << "<text x=\"18\" y=\"" << px((t + b) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << px((t + b) / 2) << ")\">" << xml_escape(ylabel) << "</text>\n";
  if (!title.empty()) {
    os << "<text x=\"" << px((l + r) / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
       << xml_escape(title) << "</text>\n";
  }
  os << "</g>\n";
  return os.str();
}

std::string legend_entry(std::size_t index, const std::string& color, const std::string& label) {
  std::ostringstream os;
  const double x = kWidth - kRight + 20, y = kTop + 10 + 18.0 * static_cast<double>(index);
  os << "<rect class=\"legend\" x=\"" << px(x) << "\" y=\"" << px(y - 9) << "\" width=\"10\" height=\"10\" fill=\""
     << color << "\"/><text x=\"" << px(x + 16) << "\" y=\"" << px(y) << "\" font-family=\"sans-serif\" font-size=\"11\">"
     << xml_escape(label) << "</text>\n";
  return os.str();
}

void check_label(const std::string& label) {
  if (label.find_first_of(",\n\r") != std::string::npos) {
    throw EvalError("plot label '" + label + "' contains a comma or newline");
  }
}

}  // namespace

PlotFormat parse_plot_format(const std::string& name) {
  if (name == "csv") return PlotFormat::csv;
  if (name == "svg") return PlotFormat::svg;
  throw EvalError("unknown plot format '" + name + "' (expected csv or svg)");
}

std::span<const char* const> plot_palette() { return kPalette; }

void emit_plot(std::span<const SweepRow> rows, const std::filesystem::path& path, PlotFormat format) {
  if (format == PlotFormat::csv) {
    std::string out = "n,mel_cd_db,std,runs\n";
    for (const auto& r : rows) {
      out += std::to_string(r.n_sentences) + "," + num(r.mel_cd_db) + "," + num(r.std) + "," +
             std::to_string(r.runs) + "\n";
    }
    write_text(path, out);
    return;
  }
  if (rows.empty()) throw EmptyPlot("emit_plot: no sweep rows to draw");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& r : rows) {
    x0 = std::min(x0, static_cast<double>(r.n_sentences));
    x1 = std::max(x1, static_cast<double>(r.n_sentences));
    y0 = std::min(y0, r.mel_cd_db - r.std);
    y1 = std::max(y1, r.mel_cd_db + r.std);
  }
  const Frame fr = fit_frame(x0, x1, y0, y1);
  std::ostringstream os;
  os << svg_open(fr, "mel-CD vs. embedding utterances", "utterances per speaker (n)", "mel-CD (dB)");
  os << "<polyline fill=\"none\" stroke=\"" << kPalette[0] << "\" stroke-width=\"1.5\" points=\"";
  for (const auto& r : rows) os << px(fr.sx(static_cast<double>(r.n_sentences))) << "," << px(fr.sy(r.mel_cd_db)) << " ";
  os << "\"/>\n";
  for (const auto& r : rows) {
    const double x = fr.sx(static_cast<double>(r.n_sentences));
    os << "<line stroke=\"" << kPalette[0] << "\" x1=\"" << px(x) << "\" y1=\"" << px(fr.sy(r.mel_cd_db - r.std))
       << "\" x2=\"" << px(x) << "\" y2=\"" << px(fr.sy(r.mel_cd_db + r.std)) << "\"/>\n";
    os << "<circle cx=\"" << px(x) << "\" cy=\"" << px(fr.sy(r.mel_cd_db)) << "\" r=\"4\" fill=\"" << kPalette[0]
       << "\"><title>n=" << r.n_sentences << " " << num(r.mel_cd_db) << " dB</title></circle>\n";
  }
  os << legend_entry(0, kPalette[0], "mean mel-CD ± std");
  os << "</svg>\n";
  write_text(path, os.str());
}

void emit_plot(std::span<const PlotPoint> points, const std::filesystem::path& path, PlotFormat format,
               const std::string& title) {
  for (const auto& p : points) check_label(p.label);
  if (format == PlotFormat::csv) {
    std::string out = "label,x,y\n";
    for (const auto& p : points) out += p.label + "," + num(p.x) + "," + num(p.y) + "\n";
    write_text(path, out);
    return;
  }
  if (points.empty()) throw EmptyPlot("emit_plot: no points to draw");
  std::vector<std::string> order;
  std::map<std::string, std::size_t> color_of;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& p : points) {
    if (color_of.emplace(p.label, order.size()).second) order.push_back(p.label);
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const Frame fr = fit_frame(x0, x1, y0, y1);
  constexpr std::size_t kColors = std::size(kPalette);
  std::ostringstream os;
  os << svg_open(fr, title, "PC 1", "PC 2");
  for (const auto& p : points) {
    os << "<circle cx=\"" << px(fr.sx(p.x)) << "\" cy=\"" << px(fr.sy(p.y)) << "\" r=\"3.5\" fill=\""
       << kPalette[color_of[p.label] % kColors] << "\" fill-opacity=\"0.8\"><title>" << xml_escape(p.label)
       << "</title></circle>\n";
  }
  for (std::size_t i = 0; i < order.size(); ++i) os << legend_entry(i, kPalette[i % kColors], order[i]);
  os << "</svg>\n";
  write_text(path, os.str());
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
  std::vector<SweepRow> rows;
  for (const auto& cells : read_csv(path, "n,mel_cd_db,std,runs")) {
    if (cells.size() != 4) throw EvalError(path.string() + ": expected 4 columns");
    SweepRow r;
    r.n_sentences = static_cast<std::size_t>(parse_double(cells[0]));
    r.mel_cd_db = parse_double(cells[1]);
    r.std = parse_double(cells[2]);
    r.runs = static_cast<std::size_t>(parse_double(cells[3]));
    rows.push_back(r);
  }
  return rows;
}

std::vector<PlotPoint> read_points_csv(const std::filesystem::path& path) {
  std::vector<PlotPoint> points;
  for (const auto& cells : read_csv(path, "label,x,y")) {
    if (cells.size() != 3) throw EvalError(path.string() + ": expected 3 columns");
    points.push_back({cells[0], parse_double(cells[1]), parse_double(cells[2])});
  }
  return points;
}

}  // namespace fhvc::eval
