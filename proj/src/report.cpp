#include "jmmsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace jmmsim {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    out_ << header[i] << (i + 1 < header.size() ? "," : "\n");
  }
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) {
    throw std::invalid_argument("CsvWriter: row width does not match header");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
  }
}

void CsvWriter::write_row(const std::vector<double>& cells) {
  std::vector<std::string> text(cells.size());
  std::transform(cells.begin(), cells.end(), text.begin(), format_double);
  write_row(text);
}

namespace {

constexpr double kWidth = 640.0, kHeight = 420.0;
constexpr double kMarginL = 70.0, kMarginR = 20.0, kMarginT = 40.0, kMarginB = 50.0;

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series) {
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  }
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
  const double plot_w = kWidth - kMarginL - kMarginR;
  const double plot_h = kHeight - kMarginT - kMarginB;
  auto px = [&](double x) { return kMarginL + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kHeight - kMarginB - (y - ymin) / (ymax - ymin) * plot_h; };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << svg_escape(title) << "</text>\n";
  // Axes.
  out << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB << "\" x2=\""
      << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\"" << kMarginL
      << "\" y2=\"" << kHeight - kMarginB << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 4.0;
    const double yv = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << px(xv) << "\" y=\"" << kHeight - kMarginB + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_double(xv) << "</text>\n";
    out << "<text x=\"" << kMarginL - 6 << "\" y=\"" << py(yv) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << format_double(yv) << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << svg_escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << kHeight / 2 << ")\">" << svg_escape(y_label)
      << "</text>\n";
  // Polylines and legend.
  double legend_y = kMarginT + 6.0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << px(s.x[i]) << "," << py(s.y[i]) << (i + 1 < s.x.size() ? " " : "");
    }
    out << "\"/>\n";
    out << "<line x1=\"" << kWidth - kMarginR - 150 << "\" y1=\"" << legend_y
        << "\" x2=\"" << kWidth - kMarginR - 130 << "\" y2=\"" << legend_y
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kWidth - kMarginR - 125 << "\" y=\"" << legend_y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << svg_escape(s.label)
        << "</text>\n";
    legend_y += 16.0;
  }
  out << "</svg>\n";
}

bool RunMetrics::all_passed() const {
  for (const auto& a : assertions) {
    if (!a.passed) return false;
  }
  return true;
}

void write_report(const std::filesystem::path& path, const std::string& scenario,
                  const RunMetrics& metrics) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "scenario: " << scenario << "\n\n";
  for (const auto& a : metrics.assertions) {
    out << (a.passed ? "[PASS] " : "[FAIL] ") << a.name << ": value "
        << format_double(a.value) << ", requirement " << a.requirement;
    if (!a.reference.empty()) out << " (reference: " << a.reference << ")";
    out << "\n";
  }
  if (!metrics.values.empty()) {
    out << "\nvalues:\n";
    for (const auto& [k, v] : metrics.values) {
      out << "  " << k << " = " << format_double(v) << "\n";
    }
  }
}

}  // namespace jmmsim
