#pragma once

// Result files: CSV or JSON tables of per-method ratios and an SVG line
// chart whose <metadata> block carries the same table as CSV.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "debias/error.hpp"
#include "debias/harness.hpp"
#include "debias/numeric.hpp"

namespace debias {

inline constexpr const char* kCsvColumns = "problem,method,axis,axis_value,n,K,R,seed,rmse_r,bias_r";

enum class ResultFormat { csv, json };

inline ResultFormat parse_result_format(const std::string& s) {
  if (s == "csv") return ResultFormat::csv;
  if (s == "json") return ResultFormat::json;
  throw Error(ErrorKind::config, "unknown format '" + s + "' (expected csv or json)");
}

/// One CSV row: a method's ratios within one summary.
struct ResultRow {
  std::string problem;
  std::string method;
  std::string axis;
  std::optional<double> axis_value;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t r = 0;
  std::uint64_t seed = 0;
  double rmse_r = 0.0;
  double bias_r = 0.0;

  bool operator==(const ResultRow& o) const {
    auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
    return problem == o.problem && method == o.method && axis == o.axis && axis_value.has_value() == o.axis_value.has_value() &&
           (!axis_value || same(*axis_value, *o.axis_value)) && n == o.n && k == o.k && r == o.r && seed == o.seed &&
           same(rmse_r, o.rmse_r) && same(bias_r, o.bias_r);
  }
};

inline std::vector<ResultRow> result_rows(const std::vector<ExperimentSummary>& summaries) {
  std::vector<ResultRow> rows;
  for (const auto& s : summaries)
    for (const auto& m : s.methods)
      rows.push_back({s.problem, m.name, s.axis, s.axis_value, s.n, s.k, s.r, s.seed, m.rmse_r, m.bias_r});
  return rows;
}

inline void write_csv(std::ostream& os, const std::vector<ExperimentSummary>& summaries,
                      const std::vector<std::string>& header_lines = {}) {
  require(!summaries.empty(), ErrorKind::contract, "no summaries to emit");
  for (const auto& h : header_lines) os << "# " << h << '\n';
  os << kCsvColumns << '\n';
  for (const auto& row : result_rows(summaries)) {
    os << row.problem << ',' << row.method << ',' << row.axis << ','
       << (row.axis_value ? format_double(*row.axis_value) : "") << ',' << row.n << ',' << row.k << ',' << row.r << ','
       << row.seed << ',' << format_double(row.rmse_r) << ',' << format_double(row.bias_r) << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::uint64_t parse_unsigned(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw Error(ErrorKind::parse, "line " + std::to_string(line) + ": not an unsigned integer: '" + s + "'");
  return v;
}

inline nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace detail

/// Parses a results CSV (as written by write_csv); '#' lines are skipped.
inline std::vector<ResultRow> read_csv(std::istream& is) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t lineno = 0;
  bool seen_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!seen_header) {
      if (line != kCsvColumns) throw Error(ErrorKind::parse, "line " + std::to_string(lineno) + ": unexpected column header");
      seen_header = true;
      continue;
    }
    const auto f = detail::split_fields(line);
    if (f.size() != 10)
      throw Error(ErrorKind::parse, "line " + std::to_string(lineno) + ": expected 10 fields, got " + std::to_string(f.size()));
    ResultRow r;
    r.problem = f[0];
    r.method = f[1];
    r.axis = f[2];
    if (!f[3].empty()) r.axis_value = parse_double(f[3]);
    r.n = detail::parse_unsigned(f[4], lineno);
    r.k = detail::parse_unsigned(f[5], lineno);
    r.r = detail::parse_unsigned(f[6], lineno);
    r.seed = detail::parse_unsigned(f[7], lineno);
    r.rmse_r = parse_double(f[8]);
    r.bias_r = parse_double(f[9]);
    rows.push_back(std::move(r));
  }
  if (!seen_header) throw Error(ErrorKind::parse, "missing column header");
  return rows;
}

/// JSON document: {"header": [...], "results": [...]}; each result carries
/// params, truth, raw sums and per-method ratios. Undefined ratios are null.
inline nlohmann::json to_json(const std::vector<ExperimentSummary>& summaries,
                              const std::vector<std::string>& header_lines = {}) {
  require(!summaries.empty(), ErrorKind::contract, "no summaries to emit");
  nlohmann::json results = nlohmann::json::array();
  for (const auto& s : summaries) {
    nlohmann::json j;
    j["problem"] = s.problem;
    j["params"] = s.params;
    j["axis"] = s.axis;
    j["axis_value"] = s.axis_value ? nlohmann::json(*s.axis_value) : nlohmann::json(nullptr);
    j["n"] = s.n;
    j["K"] = s.k;
    j["R"] = s.r;
    j["seed"] = s.seed;
    j["truth"] = s.truth_value;
    j["naive_sum_sq"] = s.naive_sum_sq;
    j["naive_sum"] = s.naive_sum;
    j["failed_trials"] = s.failed_trials;
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& m : s.methods)
      methods.push_back({{"method", m.name},
                         {"sum_sq", m.sum_sq},
                         {"sum", m.sum},
                         {"rmse_r", detail::number_or_null(m.rmse_r)},
                         {"bias_r", detail::number_or_null(m.bias_r)}});
    j["methods"] = std::move(methods);
    results.push_back(std::move(j));
  }
  return {{"header", header_lines}, {"results", std::move(results)}};
}

inline void write_results(std::ostream& os, const std::vector<ExperimentSummary>& summaries, ResultFormat format,
                          const std::vector<std::string>& header_lines = {}) {
  if (format == ResultFormat::csv)
    write_csv(os, summaries, header_lines);
  else
    os << to_json(summaries, header_lines).dump(2) << '\n';
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
  return os;
}

inline void finish_output(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

}  // namespace detail

inline void emit_results(const std::vector<ExperimentSummary>& summaries, ResultFormat format, const std::string& path,
                         const std::vector<std::string>& header_lines = {}) {
  require(!summaries.empty(), ErrorKind::contract, "no summaries to emit");
  auto os = detail::open_output(path);
  write_results(os, summaries, format, header_lines);
  detail::finish_output(os, path);
}

/// Two stacked panels (RMSE_r above Bias_r), one polyline per method, the
/// sweep axis on x (summary index when there is no axis).
inline std::string render_svg(const std::vector<ExperimentSummary>& summaries) {
  require(!summaries.empty(), ErrorKind::contract, "no summaries to plot");
  constexpr double width = 640, panel_h = 260, margin = 50;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::vector<std::string> methods;
  for (const auto& s : summaries)
    for (const auto& m : s.methods)
      if (std::find(methods.begin(), methods.end(), m.name) == methods.end()) methods.push_back(m.name);

  std::vector<double> xs;
  for (std::size_t i = 0; i < summaries.size(); ++i)
    xs.push_back(summaries[i].axis_value.value_or(static_cast<double>(i)));
  const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
  const double xmin = *xmin_it, xmax = *xmax_it;

  std::ostringstream csv;
  write_csv(csv, summaries);
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << 2 * panel_h << "\">\n";
  svg << "<metadata id=\"results\"><![CDATA[\n" << csv.str() << "]]></metadata>\n";

  const char* titles[] = {"RMSE_r", "Bias_r"};
  for (int panel = 0; panel < 2; ++panel) {
    auto value = [panel](const MethodSummary& m) { return panel == 0 ? m.rmse_r : m.bias_r; };
    double ymin = panel == 0 ? 0.0 : -0.1, ymax = 1.0;
    for (const auto& s : summaries)
      for (const auto& m : s.methods)
        if (std::isfinite(value(m))) {
          ymin = std::min(ymin, value(m));
          ymax = std::max(ymax, value(m));
        }
    const double top = panel * panel_h;
    auto px = [&](double x) { return margin + (xmax > xmin ? (x - xmin) / (xmax - xmin) : 0.5) * (width - 2 * margin); };
    auto py = [&](double y) { return top + panel_h - margin + (y - ymin) / (ymax - ymin) * (2 * margin - panel_h); };

    svg << "<g class=\"panel\" id=\"" << titles[panel] << "\">\n";
    svg << "<text x=\"" << margin << "\" y=\"" << top + 20 << "\" font-size=\"14\">" << titles[panel] << " vs "
        << summaries.front().axis << "</text>\n";
    svg << "<rect x=\"" << margin << "\" y=\"" << top + margin << "\" width=\"" << width - 2 * margin << "\" height=\""
        << panel_h - 2 * margin << "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg << "<text x=\"4\" y=\"" << py(ymax) + 4 << "\" font-size=\"10\">" << format_double(ymax) << "</text>\n";
    svg << "<text x=\"4\" y=\"" << py(ymin) + 4 << "\" font-size=\"10\">" << format_double(ymin) << "</text>\n";
    for (std::size_t j = 0; j < methods.size(); ++j) {
      svg << "<polyline class=\"method\" data-method=\"" << methods[j] << "\" fill=\"none\" stroke=\""
          << palette[j % std::size(palette)] << "\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < summaries.size(); ++i)
        for (const auto& m : summaries[i].methods)
          if (m.name == methods[j] && std::isfinite(value(m))) {
            svg << (first ? "" : " ") << px(xs[i]) << ',' << py(value(m));
            first = false;
          }
      svg << "\"/>\n";
      svg << "<text x=\"" << width - margin + 4 << "\" y=\"" << top + margin + 14 * (j + 1) << "\" font-size=\"10\" fill=\""
          << palette[j % std::size(palette)] << "\">" << methods[j] << "</text>\n";
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

inline void emit_plot(const std::vector<ExperimentSummary>& summaries, const std::string& path) {
  const std::string body = render_svg(summaries);
  auto os = detail::open_output(path);
  os << body;
  detail::finish_output(os, path);
}

}  // namespace debias
