#include "aucmi/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace aucmi::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delim, start);
    out.emplace_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string where(std::size_t line, const std::string& column) {
  return "line " + std::to_string(line) + ", column '" + column + "'";
}

std::string number_text(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void DatasetManifest::validate() const {
  std::set<std::string> names;
  int biomarkers = 0, diseases = 0;
  for (const auto& c : columns) {
    if (c.name.empty()) throw std::invalid_argument("manifest column with empty name");
    if (!names.insert(c.name).second)
      throw std::invalid_argument("duplicate manifest column: " + c.name);
    if (c.role == ColumnRole::Biomarker) ++biomarkers;
    if (c.role == ColumnRole::Disease) {
      ++diseases;
      if (c.kind != ColumnKind::Binary) throw std::invalid_argument("disease column must be binary");
    }
  }
  if (biomarkers != 1 || diseases != 1)
    throw std::invalid_argument("manifest needs exactly one biomarker and one disease column");
  if (delimiter == '\n' || delimiter == '\r') throw std::invalid_argument("invalid delimiter");
}

StudyDataset load_dataset(const DatasetManifest& manifest) {
  std::ifstream in(manifest.path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + manifest.path);
  return parse_dataset(in, manifest);
}

StudyDataset parse_dataset(std::istream& in, const DatasetManifest& manifest) {
  manifest.validate();
  const std::size_t k = manifest.columns.size();
  std::vector<std::size_t> position(k);
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;

  if (manifest.has_header) {
    if (!std::getline(in, line)) throw std::invalid_argument("dataset file is empty");
    ++lineno;
    const auto header = split(line, manifest.delimiter);
    width = header.size();
    for (std::size_t c = 0; c < k; ++c) {
      const auto it = std::find(header.begin(), header.end(), manifest.columns[c].name);
      if (it == header.end())
        throw std::invalid_argument("column '" + manifest.columns[c].name + "' not in header");
      position[c] = static_cast<std::size_t>(it - header.begin());
    }
  } else {
    std::iota(position.begin(), position.end(), std::size_t{0});
    width = k;
  }

  std::vector<Column> cols(k);
  for (std::size_t c = 0; c < k; ++c) {
    cols[c].name = manifest.columns[c].name;
    cols[c].role = manifest.columns[c].role;
    cols[c].kind = manifest.columns[c].kind;
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line, manifest.delimiter);
    if (cells.size() != width)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(width) + " fields, found " +
                                  std::to_string(cells.size()));
    for (std::size_t c = 0; c < k; ++c) {
      const auto& spec = manifest.columns[c];
      const std::string& cell = cells[position[c]];
      if (cell == spec.missing_token || cell.empty()) {
        cols[c].values.push_back(std::numeric_limits<double>::quiet_NaN());
        cols[c].missing.push_back(1);
        continue;
      }
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size() || !std::isfinite(v))
        throw std::invalid_argument(where(lineno, spec.name) + ": cannot parse '" + cell + "'");
      if (spec.kind == ColumnKind::Binary && v != 0.0 && v != 1.0)
        throw std::invalid_argument(where(lineno, spec.name) + ": binary value must be 0 or 1, got '" +
                                    cell + "'");
      cols[c].values.push_back(v);
      cols[c].missing.push_back(0);
    }
  }
  return StudyDataset(std::move(cols));
}

void write_dataset(std::ostream& out, const StudyDataset& data) {
  for (std::size_t c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data.column(c).name;
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      if (c) out << ',';
      const auto& col = data.column(c);
      if (!col.is_missing(i)) out << number_text(col.values[i]);
    }
    out << '\n';
  }
}

DatasetManifest canonical_manifest(const StudyDataset& data, std::string path) {
  DatasetManifest m;
  m.path = std::move(path);
  for (const auto& c : data.columns()) m.columns.push_back({c.name, c.role, c.kind, ""});
  return m;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<ColumnSummary> describe(const StudyDataset& data) {
  std::vector<ColumnSummary> out;
  for (const auto& col : data.columns()) {
    ColumnSummary s;
    s.name = col.name;
    s.role = col.role;
    s.kind = col.kind;
    std::vector<double> obs;
    for (std::size_t i = 0; i < col.size(); ++i)
      if (!col.is_missing(i)) obs.push_back(col.values[i]);
    s.observed = obs.size();
    s.missing = col.size() - obs.size();
    if (col.kind == ColumnKind::Binary)
      for (double v : obs) (v == 1.0 ? s.ones : s.zeros) += 1;
    std::sort(obs.begin(), obs.end());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.min = obs.empty() ? nan : obs.front();
    s.max = obs.empty() ? nan : obs.back();
    s.q1 = quantile_sorted(obs, 0.25);
    s.median = quantile_sorted(obs, 0.5);
    s.q3 = quantile_sorted(obs, 0.75);
    s.mean = obs.empty() ? nan : std::accumulate(obs.begin(), obs.end(), 0.0) / obs.size();
    out.push_back(s);
  }
  return out;
}

std::string format_description(const std::vector<ColumnSummary>& summary) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %-10s %9s %9s %9s %9s %9s %9s %9s\n", "variable", "role",
                "min", "Q1", "median", "mean", "Q3", "max", "#missing");
  out << buf;
  for (const auto& s : summary) {
    const auto role = std::string(to_string(s.role));
    if (s.kind == ColumnKind::Binary) {
      const double rows = static_cast<double>(s.observed + s.missing);
      std::snprintf(buf, sizeof buf, "%-14s %-10s 1: %zu (%.1f%%), 0: %zu (%.1f%%), missing: %zu\n",
                    s.name.c_str(), role.c_str(), s.ones, rows ? 100.0 * s.ones / rows : 0.0,
                    s.zeros, rows ? 100.0 * s.zeros / rows : 0.0, s.missing);
    } else {
      std::snprintf(buf, sizeof buf, "%-14s %-10s %9.3f %9.3f %9.3f %9.3f %9.3f %9.3f %9zu\n",
                    s.name.c_str(), role.c_str(), s.min, s.q1, s.median, s.mean, s.q3, s.max,
                    s.missing);
    }
    out << buf;
  }
  return out.str();
}

}  // namespace aucmi::io
