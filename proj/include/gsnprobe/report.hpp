#pragma once

// CSV tables and minimal SVG charts for diagnostic output.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gsnprobe::report {

// Cell holding either text or a number; numbers are written with %.17g,
// empty optionals as blank cells.
class Cell {
 public:
  Cell(std::string text) : text_(std::move(text)) {}
  Cell(const char* text) : text_(text) {}
  Cell(double v);
  Cell(std::optional<double> v);
  Cell(long long v) : text_(std::to_string(v)) {}
  Cell(unsigned long long v) : text_(std::to_string(v)) {}
  Cell(int v) : text_(std::to_string(v)) {}
  Cell(unsigned long v) : text_(std::to_string(v)) {}
  Cell(long v) : text_(std::to_string(v)) {}
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string format_double(double v);
std::string csv_escape(const std::string& field);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // non-finite points are skipped
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 720;
  int height = 420;
};

std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);
std::string scatter_chart(const std::vector<Series>& series, const ChartOptions& options);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gsnprobe::report
