#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "aucmi/dataset.hpp"

namespace aucmi::io {

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::Covariate;
  ColumnKind kind = ColumnKind::Continuous;
  std::string missing_token;  // cell text meaning "missing"; empty cells by default
};

struct DatasetManifest {
  std::string path;
  char delimiter = ',';
  std::vector<ColumnSpec> columns;
  bool has_header = true;

  /// Unique names, exactly one biomarker and one disease column, binary disease.
  void validate() const;
};

/// Parses a delimited file. With a header, manifest columns are looked up by
/// name and unlisted file columns are skipped; without one they are taken by
/// position. Errors name the offending line and column.
StudyDataset load_dataset(const DatasetManifest& manifest);
StudyDataset parse_dataset(std::istream& in, const DatasetManifest& manifest);

/// Canonical CSV: header of column names, shortest round-trip numbers, empty
/// cells for missing entries.
void write_dataset(std::ostream& out, const StudyDataset& data);

/// Manifest that reloads a canonically written dataset with the same roles and kinds.
DatasetManifest canonical_manifest(const StudyDataset& data, std::string path);

struct ColumnSummary {
  std::string name;
  ColumnRole role = ColumnRole::Covariate;
  ColumnKind kind = ColumnKind::Continuous;
  std::size_t observed = 0;
  std::size_t missing = 0;
  // continuous columns; NaN when nothing is observed
  double min = 0.0, q1 = 0.0, median = 0.0, mean = 0.0, q3 = 0.0, max = 0.0;
  // binary columns
  std::size_t ones = 0, zeros = 0;
};

/// Per-column summary; quartiles interpolate linearly between order statistics.
std::vector<ColumnSummary> describe(const StudyDataset& data);
std::string format_description(const std::vector<ColumnSummary>& summary);

/// Linear-interpolation quantile of sorted values (type 7).
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace aucmi::io
