#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace jmmsim {

/// Deterministic decimal formatting shared by every emitted file.
std::string format_double(double v);

/// Line-buffered CSV writer with a fixed header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void write_row(const std::vector<std::string>& cells);
  void write_row(const std::vector<double>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// One named polyline for the SVG plot writer.
struct PlotSeries {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal self-contained SVG line plot: axes, ticks, legend, polylines.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

/// One acceptance line of a scenario report.
struct Assertion {
  std::string name;
  double value = 0.0;
  std::string requirement;  // human-readable bound
  bool passed = false;
  std::string reference;    // reported value of the original experiment, if any
};

struct RunMetrics {
  std::vector<Assertion> assertions;
  std::vector<std::pair<std::string, double>> values;  // extra reported numbers
  bool all_passed() const;
};

void write_report(const std::filesystem::path& path, const std::string& scenario,
                  const RunMetrics& metrics);

}  // namespace jmmsim
