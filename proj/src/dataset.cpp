#include "aucmi/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace aucmi {

std::string_view to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::Biomarker: return "biomarker";
    case ColumnRole::Disease: return "disease";
    case ColumnRole::Covariate: return "covariate";
    case ColumnRole::Ignore: return "ignore";
  }
  return "?";
}

std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::Binary ? "binary" : "continuous";
}

ColumnRole parse_role(std::string_view s) {
  if (s == "biomarker") return ColumnRole::Biomarker;
  if (s == "disease") return ColumnRole::Disease;
  if (s == "covariate") return ColumnRole::Covariate;
  if (s == "ignore") return ColumnRole::Ignore;
  throw std::invalid_argument("unknown column role: " + std::string(s));
}

ColumnKind parse_kind(std::string_view s) {
  if (s == "continuous") return ColumnKind::Continuous;
  if (s == "binary") return ColumnKind::Binary;
  throw std::invalid_argument("unknown column kind: " + std::string(s));
}

std::size_t Column::missing_count() const noexcept {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), std::uint8_t{1}));
}

Column Column::observed(std::string name, ColumnRole role, ColumnKind kind,
                        std::vector<double> values) {
  Column c{std::move(name), role, kind, std::move(values), {}};
  c.missing.assign(c.values.size(), 0);
  return c;
}

StudyDataset::StudyDataset(std::vector<Column> columns) : columns_(std::move(columns)) {
  validate();
}

void StudyDataset::validate() {
  if (columns_.empty()) throw std::invalid_argument("dataset has no columns");
  rows_ = columns_.front().size();
  std::size_t n_disease = 0, n_biomarker = 0;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    Column& col = columns_[c];
    if (col.values.size() != rows_ || col.missing.size() != rows_)
      throw std::invalid_argument("column '" + col.name + "' has inconsistent length");
    for (std::size_t i = 0; i < rows_; ++i) {
      if (col.is_missing(i)) {
        col.values[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      if (!std::isfinite(col.values[i]))
        throw std::invalid_argument("column '" + col.name + "' has a non-finite observed value");
      if (col.kind == ColumnKind::Binary && col.values[i] != 0.0 && col.values[i] != 1.0)
        throw std::invalid_argument("column '" + col.name + "' is binary but holds " +
                                    std::to_string(col.values[i]));
    }
    if (col.role == ColumnRole::Disease) {
      if (col.kind != ColumnKind::Binary)
        throw std::invalid_argument("disease column must be binary");
      disease_ = c;
      ++n_disease;
    } else if (col.role == ColumnRole::Biomarker) {
      biomarker_ = c;
      ++n_biomarker;
    }
  }
  if (n_disease != 1) throw std::invalid_argument("dataset needs exactly one disease column");
  if (n_biomarker != 1) throw std::invalid_argument("dataset needs exactly one biomarker column");
}

std::vector<std::size_t> StudyDataset::model_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < columns_.size(); ++c)
    if (columns_[c].role != ColumnRole::Ignore) out.push_back(c);
  return out;
}

bool StudyDataset::complete() const noexcept {
  for (std::size_t c : model_columns())
    if (!columns_[c].complete()) return false;
  return true;
}

roc::GroupedScores StudyDataset::scores() const {
  const Column& d = disease();
  const Column& t = biomarker();
  std::vector<double> x, y;
  for (std::size_t i = 0; i < rows_; ++i) {
    if (d.is_missing(i) || t.is_missing(i)) continue;
    (d.values[i] == 1.0 ? y : x).push_back(t.values[i]);
  }
  return roc::GroupedScores(std::move(x), std::move(y));
}

StudyDataset StudyDataset::verified_subset() const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < rows_; ++i)
    if (!disease().is_missing(i)) keep.push_back(i);
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const Column& col : columns_) {
    Column sub{col.name, col.role, col.kind, {}, {}};
    sub.values.reserve(keep.size());
    sub.missing.reserve(keep.size());
    for (std::size_t i : keep) {
      sub.values.push_back(col.values[i]);
      sub.missing.push_back(col.missing[i]);
    }
    cols.push_back(std::move(sub));
  }
  return StudyDataset(std::move(cols));
}

bool operator==(const StudyDataset& a, const StudyDataset& b) {
  if (a.rows_ != b.rows_ || a.columns_.size() != b.columns_.size()) return false;
  for (std::size_t c = 0; c < a.columns_.size(); ++c) {
    const Column& ca = a.columns_[c];
    const Column& cb = b.columns_[c];
    if (ca.name != cb.name || ca.role != cb.role || ca.kind != cb.kind || ca.missing != cb.missing)
      return false;
    for (std::size_t i = 0; i < a.rows_; ++i) {
      if (ca.is_missing(i)) continue;
      if (std::memcmp(&ca.values[i], &cb.values[i], sizeof(double)) != 0) return false;
    }
  }
  return true;
}

}  // namespace aucmi
