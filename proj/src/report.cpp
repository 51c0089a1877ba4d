#include "gsnprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "gsnprobe/error.hpp"

namespace gsnprobe::report {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Cell::Cell(double v) : text_(format_double(v)) {}
Cell::Cell(std::optional<double> v) : text_(v ? format_double(*v) : std::string()) {}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void CsvTable::add(std::vector<Cell> row) {
  if (row.size() != header_.size()) {
    throw UsageError("CSV row has " + std::to_string(row.size()) + " cells, header has " +
                     std::to_string(header_.size()));
  }
  std::vector<std::string> cells;
  cells.reserve(row.size());
  for (auto& c : row) cells.push_back(c.text());
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::ostringstream out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(cells[i]);
    }
    out << '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out.str();
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("write failed: " + path.string());
}

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
  double unmap(double f) const {
    const double t = lo + f * (hi - lo);
    return log ? std::pow(10.0, t) : t;
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis fit_axis(const std::vector<Series>& series, bool use_x, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!usable(s.x[i], use_x ? log : false) || !usable(s.y[i], use_x ? false : log)) continue;
      double v = use_x ? s.x[i] : s.y[i];
      if (log) v = std::log10(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  return {lo, hi, log};
}

std::string render(const std::vector<Series>& series, const ChartOptions& o, bool lines) {
  const double left = 70, right = 150, top = 40, bottom = 50;
  const double pw = o.width - left - right;
  const double ph = o.height - top - bottom;
  const Axis ax = fit_axis(series, true, o.log_x);
  const Axis ay = fit_axis(series, false, o.log_y);
  auto px = [&](double v) { return left + ax.map(v) * pw; };
  auto py = [&](double v) { return top + (1.0 - ay.map(v)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\""
      << o.height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << o.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(o.title) << "</text>\n";
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double x = left + f * pw;
    const double y = top + (1.0 - f) * ph;
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(top + ph + 4) << "\" stroke=\"#444\"/>";
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 16)
        << "\" text-anchor=\"middle\">" << tick(ax.unmap(f)) << "</text>\n";
    svg << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left)
        << "\" y2=\"" << num(y) << "\" stroke=\"#444\"/>";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">" << tick(ay.unmap(f)) << "</text>\n";
  }
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << o.height - 12
      << "\" text-anchor=\"middle\">" << xml_escape(o.x_label) << "</text>\n";
  svg << "<text transform=\"translate(16," << num(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(o.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (lines) {
      std::string path;
      bool pen = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (!usable(s.x[i], o.log_x) || !usable(s.y[i], o.log_y)) {
          pen = false;
          continue;
        }
        path += (pen ? " L" : " M") + num(px(s.x[i])) + "," + num(py(s.y[i]));
        pen = true;
      }
      if (!path.empty()) {
        svg << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour
            << "\" stroke-width=\"1.2\"/>\n";
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!usable(s.x[i], o.log_x) || !usable(s.y[i], o.log_y)) continue;
        svg << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
            << "\" r=\"2.5\" fill=\"" << colour << "\" fill-opacity=\"0.7\"/>\n";
      }
    }
    const double ly = top + 12 + 16.0 * static_cast<double>(k);
    svg << "<rect x=\"" << num(left + pw + 12) << "\" y=\"" << num(ly - 8)
        << "\" width=\"10\" height=\"10\" fill=\"" << colour << "\"/>";
    svg << "<text x=\"" << num(left + pw + 26) << "\" y=\"" << num(ly + 1) << "\">"
        << xml_escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string line_chart(const std::vector<Series>& series, const ChartOptions& options) {
  return render(series, options, true);
}

std::string scatter_chart(const std::vector<Series>& series, const ChartOptions& options) {
  return render(series, options, false);
}

}  // namespace gsnprobe::report
