#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dci/discrete_dist.hpp"
#include "dci/errors.hpp"

namespace dci {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_int(std::string_view token, int& out) {
  token = trim(token);
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

inline bool parse_double(std::string_view token, double& out) {
  token = trim(token);
  if (token.empty()) return false;
  std::string buf(token);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace detail

// Two integer columns "x,y", optional single header line, LF or CRLF.
inline PairedSample parse_sample_csv(std::istream& in) {
  PairedSample sample;
  std::string raw;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::strip_cr(raw);
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    if (fields.size() != 2)
      throw data_error("line " + std::to_string(line_no) + ": expected two columns");
    int xv = 0, yv = 0;
    const bool ok = detail::parse_int(fields[0], xv) && detail::parse_int(fields[1], yv);
    if (!ok) {
      if (first_content_line) {  // header line
        first_content_line = false;
        continue;
      }
      throw data_error("line " + std::to_string(line_no) + ": expected integer values");
    }
    first_content_line = false;
    sample.push(xv, yv);
  }
  if (sample.n() == 0) throw data_error("empty sample");
  return sample;
}

inline PairedSample load_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  return parse_sample_csv(in);
}

inline void write_sample_csv(std::ostream& out, const PairedSample& sample) {
  out << "x,y\n";
  for (std::size_t t = 0; t < sample.n(); ++t) out << sample.x[t] << ',' << sample.y[t] << '\n';
}

// Numeric matrix from CSV, optional single header line. Rows must agree in
// width.
inline std::vector<std::vector<double>> parse_numeric_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::strip_cr(raw);
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv(line);
    std::vector<double> row;
    row.reserve(fields.size());
    bool ok = true;
    for (const auto& field : fields) {
      double v = 0.0;
      if (!detail::parse_double(field, v)) {
        ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!ok) {
      if (first_content_line) {
        first_content_line = false;
        continue;
      }
      throw data_error("line " + std::to_string(line_no) + ": expected numeric values");
    }
    first_content_line = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw data_error("line " + std::to_string(line_no) + ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw data_error("empty input");
  return rows;
}

// Whitespace-separated numeric columns (cause-effect pair files). Column
// indices are zero-based; both must exist on every line.
inline std::pair<std::vector<double>, std::vector<double>> read_pair_columns(
    std::istream& in, std::size_t col_a, std::size_t col_b) {
  std::vector<double> a, b;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::strip_cr(raw);
    if (detail::trim(line).empty()) continue;
    std::istringstream fields(line);
    std::vector<double> row;
    double v = 0.0;
    while (fields >> v) row.push_back(v);
    if (row.size() <= std::max(col_a, col_b))
      throw data_error("line " + std::to_string(line_no) + ": not enough columns");
    a.push_back(row[col_a]);
    b.push_back(row[col_b]);
  }
  if (a.empty()) throw data_error("empty input");
  return {std::move(a), std::move(b)};
}

// Discretization rule: `auto_rule` applies round(20*v) when max |v| < 1 and
// round(v) otherwise; a positive `scale` forces round(scale*v).
struct DiscretizeRule {
  bool auto_rule = true;
  double scale = 0.0;

  static DiscretizeRule automatic() { return DiscretizeRule{true, 0.0}; }
  static DiscretizeRule scaled(double k) { return DiscretizeRule{false, k}; }
};

inline std::vector<int> discretize_column(std::span<const double> values, DiscretizeRule rule) {
  if (values.empty()) throw data_error("empty column");
  double max_abs = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) throw data_error("non-finite value in column");
    max_abs = std::max(max_abs, std::abs(v));
  }
  double factor = 1.0;
  if (rule.auto_rule) {
    factor = max_abs < 1.0 ? 20.0 : 1.0;
  } else {
    if (!(rule.scale > 0.0)) throw std::invalid_argument("scale must be positive");
    factor = rule.scale;
  }
  std::vector<int> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(static_cast<int>(std::llround(factor * v)));
  return out;
}

}  // namespace dci
