#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aucmi/roc_core.hpp"

namespace aucmi {

enum class ColumnRole { Biomarker, Disease, Covariate, Ignore };
enum class ColumnKind { Continuous, Binary };

std::string_view to_string(ColumnRole role);
std::string_view to_string(ColumnKind kind);
ColumnRole parse_role(std::string_view s);
ColumnKind parse_kind(std::string_view s);

struct Column {
  std::string name;
  ColumnRole role = ColumnRole::Covariate;
  ColumnKind kind = ColumnKind::Continuous;
  std::vector<double> values;         // NaN where missing
  std::vector<std::uint8_t> missing;  // 1 where missing

  std::size_t size() const noexcept { return values.size(); }
  bool is_missing(std::size_t i) const noexcept { return missing[i] != 0; }
  std::size_t missing_count() const noexcept;
  bool complete() const noexcept { return missing_count() == 0; }

  static Column observed(std::string name, ColumnRole role, ColumnKind kind,
                         std::vector<double> values);
};

/// Rectangular data with one disease column, one biomarker column and any
/// number of covariates. Missing entries carry a flag; observed binary entries
/// are validated to {0,1}.
class StudyDataset {
 public:
  StudyDataset() = default;
  explicit StudyDataset(std::vector<Column> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return columns_.size(); }
  const Column& column(std::size_t c) const { return columns_.at(c); }
  Column& column(std::size_t c) { return columns_.at(c); }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  std::size_t disease_index() const noexcept { return disease_; }
  std::size_t biomarker_index() const noexcept { return biomarker_; }
  const Column& disease() const { return columns_[disease_]; }
  const Column& biomarker() const { return columns_[biomarker_]; }

  /// Columns that take part in imputation (role != Ignore), in column order.
  std::vector<std::size_t> model_columns() const;
  bool complete() const noexcept;

  /// Scores from rows where both disease and biomarker are observed.
  /// Throws std::invalid_argument("empty group") when a class has no rows.
  roc::GroupedScores scores() const;

  /// Rows where the disease status is observed (complete-case subset).
  StudyDataset verified_subset() const;

  friend bool operator==(const StudyDataset& a, const StudyDataset& b);

 private:
  void validate();

  std::vector<Column> columns_;
  std::size_t rows_ = 0;
  std::size_t disease_ = 0;
  std::size_t biomarker_ = 0;
};

}  // namespace aucmi
