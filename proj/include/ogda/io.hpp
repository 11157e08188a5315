#pragma once

// CSV and SVG emission with deterministic number formatting.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "ogda/analysis.hpp"
#include "ogda/error.hpp"

namespace ogda {

/// Shortest-general rendering with 17 significant digits (printf %.17g).
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Shortest text that parses back to exactly v.
inline std::string format_shortest(double v) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) raise(ErrorCode::kIoError, "cannot create directory for " + path.string() + ": " + ec.message());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::kIoError, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) raise(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) raise(ErrorCode::kIoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

inline std::string render_csv(const std::vector<MetricSeries>& series) {
  std::string out = "t";
  for (const auto& s : series) out += "," + s.name;
  out += "\n";
  if (series.empty()) return out;
  const std::size_t n = series.front().values.size();
  const std::size_t off = series.front().t_offset;
  for (const auto& s : series) {
    if (s.values.size() != n || s.t_offset != off) {
      raise(ErrorCode::kDimensionMismatch, "CSV series must share one t range");
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    out += std::to_string(k + off);
    for (const auto& s : series) {
      out += ',';
      out += format_double(s.values[k]);
    }
    out += '\n';
  }
  return out;
}

/// Header "t,<names>", one row per t, 17 significant digits, LF endings.
inline void emit_csv(const std::vector<MetricSeries>& series, const std::filesystem::path& path) {
  write_file_atomic(path, render_csv(series));
}

enum class Axes { kLogY, kLogLog };

struct SvgLayout {
  double width = 800.0;
  double height = 500.0;
  double left = 70.0;
  double right = 200.0;
  double top = 30.0;
  double bottom = 50.0;
  std::size_t max_points = 4000;
};

namespace detail {

/// Indices kept when a series is thinned to at most `limit` points. Uniform
/// in t for log_y, uniform in ln t for log_log; the last point is always kept.
inline std::vector<std::size_t> thin_indices(std::size_t n, std::size_t off, Axes axes, std::size_t limit) {
  std::vector<std::size_t> idx;
  if (n <= limit) {
    for (std::size_t k = 0; k < n; ++k) idx.push_back(k);
    return idx;
  }
  if (axes == Axes::kLogY) {
    for (std::size_t i = 0; i < limit; ++i) idx.push_back(i * (n - 1) / (limit - 1));
  } else {
    const double t0 = static_cast<double>(std::max<std::size_t>(off, 1));
    const double t1 = static_cast<double>(n - 1 + off);
    for (std::size_t i = 0; i < limit; ++i) {
      const double t = t0 * std::pow(t1 / t0, static_cast<double>(i) / static_cast<double>(limit - 1));
      const auto k = static_cast<std::size_t>(std::llround(t)) - off;
      idx.push_back(std::min(k, n - 1));
    }
  }
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

inline std::string xml_escape(const std::string& s) {
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

}  // namespace detail

inline std::string render_svg(const std::vector<MetricSeries>& series, Axes axes, const SvgLayout& lay = {}) {
  static const char* const kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  struct Pt {
    double x, y;
  };
  std::vector<std::vector<Pt>> pts(series.size());
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& ser = series[s];
    for (std::size_t k = 0; k < ser.values.size(); ++k) {
      const double v = ser.values[k];
      if (!(v > 0.0) || !std::isfinite(v)) {
        raise(ErrorCode::kNonPositiveValue,
              "series '" + ser.name + "' has a non-positive value at t = " + std::to_string(k + ser.t_offset));
      }
    }
    for (std::size_t k : detail::thin_indices(ser.values.size(), ser.t_offset, axes, lay.max_points)) {
      const double t = static_cast<double>(k + ser.t_offset);
      if (axes == Axes::kLogLog && t <= 0.0) continue;  // t = 0 has no place on a log axis
      const Pt p{axes == Axes::kLogLog ? std::log10(t) : t, std::log10(ser.values[k])};
      pts[s].push_back(p);
      xmin = std::min(xmin, p.x), xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y), ymax = std::max(ymax, p.y);
    }
  }
  if (!(xmin <= xmax)) xmin = 0.0, xmax = 1.0;
  if (!(ymin <= ymax)) ymin = 0.0, ymax = 1.0;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;

  const double pw = lay.width - lay.left - lay.right;
  const double ph = lay.height - lay.top - lay.bottom;
  auto sx = [&](double x) { return lay.left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return lay.top + (ymax - y) / (ymax - ymin) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_shortest(lay.width) + "\" height=\"" +
         format_shortest(lay.height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + format_shortest(lay.width) + "\" height=\"" +
         format_shortest(lay.height) + "\" fill=\"white\"/>\n";
  out += "<rect x=\"" + format_shortest(lay.left) + "\" y=\"" + format_shortest(lay.top) + "\" width=\"" +
         format_shortest(pw) + "\" height=\"" + format_shortest(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  const std::string xlabel = axes == Axes::kLogLog ? "log10 t" : "t";
  out += "<text x=\"" + format_shortest(lay.left + pw / 2) + "\" y=\"" + format_shortest(lay.height - 10) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + xlabel + " [" + format_shortest(xmin) + ", " +
         format_shortest(xmax) + "]</text>\n";
  out += "<text x=\"12\" y=\"" + format_shortest(lay.top + ph / 2) + "\" font-size=\"12\" transform=\"rotate(-90 12 " +
         format_shortest(lay.top + ph / 2) + ")\" text-anchor=\"middle\">log10 value [" + format_double(ymin) + ", " +
         format_double(ymax) + "]</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % (sizeof kColors / sizeof *kColors)];
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < pts[s].size(); ++i) {
      if (i) out += ' ';
      out += format_double(sx(pts[s][i].x)) + "," + format_double(sy(pts[s][i].y));
    }
    out += "\"/>\n";
    const double ly = lay.top + 16.0 * static_cast<double>(s + 1);
    out += "<text x=\"" + format_shortest(lay.width - lay.right + 10) + "\" y=\"" + format_shortest(ly) +
           "\" font-size=\"11\" fill=\"" + color + "\">" + detail::xml_escape(series[s].name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

/// One polyline per series on log_y or log_log axes. Long series are thinned.
inline void emit_svg(const std::vector<MetricSeries>& series, Axes axes, const std::filesystem::path& path) {
  write_file_atomic(path, render_svg(series, axes));
}

}  // namespace ogda
