// CSV tables, JSON helpers, a small SVG line-plot writer, atomic file writes
// and the config hash.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "epilab/core.hpp"

namespace epilab::io {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Writes to a sibling temporary file and renames it over the target.
inline void write_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::validation, "cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) fail(ErrorKind::validation, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::validation, "cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Number with 17 significant digits; integers print without exponent.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Cell = std::variant<double, long long, std::string, bool>;

/// RFC 4180: CRLF line ends, fields quoted when they hold a comma, quote or
/// line break, quotes doubled.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<Cell> row) {
    require(row.size() == header_.size(), "csv: row has " + std::to_string(row.size()) + " fields, header has " +
                                              std::to_string(header_.size()));
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const { return rows_.size(); }

  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    return out + "\"";
  }

  static std::string cell_text(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) return format_number(v);
          else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
          else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
          else return escape(v);
        },
        c);
  }

  std::string str() const {
    std::string out;
    auto line = [&](const auto& cells, auto&& text) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += text(cells[i]);
      }
      out += "\r\n";
    };
    line(header_, [](const std::string& s) { return escape(s); });
    for (const auto& r : rows_) line(r, [](const Cell& c) { return cell_text(c); });
    return out;
  }

  void write(const fs::path& path) const { write_atomic(path, str()); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// Minimal RFC 4180 reader: returns rows of fields, header included.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) fail(ErrorKind::validation, "csv: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Numeric columns of a CSV file with a header row.
inline std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, std::size_t columns) {
  const auto rows = parse_csv(read_file(path));
  require(!rows.empty(), "csv: " + path.string() + " is empty");
  std::vector<std::vector<double>> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require(rows[r].size() == columns, "csv: " + path.string() + " row " + std::to_string(r) + " needs " +
                                           std::to_string(columns) + " fields");
    std::vector<double> v;
    for (const auto& f : rows[r]) {
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == f.size() && !f.empty(), "csv: " + path.string() + " has a non-numeric field '" + f + "'");
      v.push_back(d);
    }
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline constexpr int kSchemaVersion = 1;

/// Finite numbers stay numbers; infinities and NaN become strings so the
/// document remains valid JSON.
inline json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

inline json number(const ExtReal& v) { return v.is_finite() ? json(v.value()) : json("inf"); }

template <class T>
json optional_number(const std::optional<T>& v) {
  return v ? number(*v) : json(nullptr);
}

inline void write_json(const fs::path& path, const json& doc) { write_atomic(path, doc.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool markers = true;
};

struct Marker {
  enum class Axis { x, y } axis = Axis::x;
  double at = 0.0;
  std::string label;
  std::string color = "#d62728";
};

/// Line plot with linear axes, tick labels, a legend and dashed marker lines.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add(Series s) {
    require(s.x.size() == s.y.size(), "svg: series x and y differ in length");
    series_.push_back(std::move(s));
  }
  void mark(Marker m) { markers_.push_back(std::move(m)); }

  std::string str() const {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series_)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        x0 = std::min(x0, s.x[i]);
        x1 = std::max(x1, s.x[i]);
        y0 = std::min(y0, s.y[i]);
        y1 = std::max(y1, s.y[i]);
      }
    for (const auto& m : markers_) {
      if (!std::isfinite(m.at)) continue;
      if (m.axis == Marker::Axis::x) x0 = std::min(x0, m.at), x1 = std::max(x1, m.at);
      else y0 = std::min(y0, m.at), y1 = std::max(y1, m.at);
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
       << W << ' ' << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << xml(title_) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
      const double xv = x0 + k * (x1 - x0) / 5, yv = y0 + k * (y1 - y0) / 5;
      os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick(xv) << "</text>\n";
      os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(yv) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml(xlabel_) << "</text>\n";
    os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
       << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml(ylabel_) << "</text>\n";
    for (const auto& m : markers_) {
      if (!std::isfinite(m.at)) continue;
      if (m.axis == Marker::Axis::x)
        os << "<line x1=\"" << px(m.at) << "\" y1=\"" << T << "\" x2=\"" << px(m.at) << "\" y2=\"" << H - B;
      else
        os << "<line x1=\"" << L << "\" y1=\"" << py(m.at) << "\" x2=\"" << W - R << "\" y2=\"" << py(m.at);
      os << "\" stroke=\"" << m.color << "\" stroke-dasharray=\"5,4\"/>\n";
      const double tx = m.axis == Marker::Axis::x ? px(m.at) + 4 : L + 4;
      const double ty = m.axis == Marker::Axis::x ? T + 14 : py(m.at) - 4;
      os << "<text x=\"" << tx << "\" y=\"" << ty << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
         << m.color << "\">" << xml(m.label) << "</text>\n";
    }
    int legend = 0;
    for (const auto& s : series_) {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      os << "\"/>\n";
      if (s.markers)
        for (std::size_t i = 0; i < s.x.size(); ++i)
          if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
            os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"2.5\" fill=\"" << s.color
               << "\"/>\n";
      const double ly = T + 16 + 16 * legend++;
      os << "<line x1=\"" << W - R - 150 << "\" y1=\"" << ly << "\" x2=\"" << W - R - 130 << "\" y2=\"" << ly
         << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << W - R - 125 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
         << xml(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
  }

  void write(const fs::path& path) const { write_atomic(path, str()); }

 private:
  static std::string xml(const std::string& s) {
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
  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
  }

  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<Marker> markers_;
};

}  // namespace epilab::io
