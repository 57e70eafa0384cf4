#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cclass/error.hpp"

namespace cclass {

enum class ColumnType { binary, categorical, continuous };
enum class Role { treatment, outcome, covariate, noise };

inline std::string_view to_string(ColumnType t) {
  switch (t) {
    case ColumnType::binary: return "binary";
    case ColumnType::categorical: return "categorical";
    case ColumnType::continuous: return "continuous";
  }
  return "?";
}

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::treatment: return "treatment";
    case Role::outcome: return "outcome";
    case Role::covariate: return "covariate";
    case Role::noise: return "noise";
  }
  return "?";
}

inline std::optional<ColumnType> parse_column_type(std::string_view s) {
  if (s == "binary") return ColumnType::binary;
  if (s == "categorical") return ColumnType::categorical;
  if (s == "continuous") return ColumnType::continuous;
  return std::nullopt;
}

inline std::optional<Role> parse_role(std::string_view s) {
  if (s == "treatment") return Role::treatment;
  if (s == "outcome") return Role::outcome;
  if (s == "covariate") return Role::covariate;
  if (s == "noise") return Role::noise;
  return std::nullopt;
}

inline constexpr int kMissingCode = -1;

/// One typed column. Discrete columns (binary, categorical) store category
/// codes into `levels`; for binary columns code 1 is the positive / treated
/// level. Continuous columns store doubles, NaN meaning missing.
struct Column {
  std::string name;
  ColumnType type = ColumnType::continuous;
  Role role = Role::covariate;
  std::vector<std::string> levels;
  std::vector<int> codes;
  std::vector<double> values;

  static Column binary(std::string name, std::vector<int> codes, Role role = Role::covariate) {
    return categorical(std::move(name), {"0", "1"}, std::move(codes), role);
  }

  static Column categorical(std::string name, std::vector<std::string> levels, std::vector<int> codes,
                            Role role = Role::covariate) {
    Column c;
    c.name = std::move(name);
    c.type = levels.size() == 2 ? ColumnType::binary : ColumnType::categorical;
    c.role = role;
    c.levels = std::move(levels);
    c.codes = std::move(codes);
    for (int v : c.codes)
      if (v != kMissingCode && (v < 0 || v >= static_cast<int>(c.levels.size())))
        fail(ErrorKind::Schema, "column '" + c.name + "' has a code outside its levels");
    return c;
  }

  static Column continuous(std::string name, std::vector<double> values, Role role = Role::covariate) {
    Column c;
    c.name = std::move(name);
    c.type = ColumnType::continuous;
    c.role = role;
    c.values = std::move(values);
    return c;
  }

  bool is_discrete() const { return type != ColumnType::continuous; }
  int arity() const { return static_cast<int>(levels.size()); }
  std::size_t size() const { return is_discrete() ? codes.size() : values.size(); }

  bool is_missing(std::size_t row) const {
    return is_discrete() ? codes[row] == kMissingCode : std::isnan(values[row]);
  }

  bool has_missing() const {
    for (std::size_t i = 0; i < size(); ++i)
      if (is_missing(i)) return true;
    return false;
  }

  /// Numeric view of a cell: the code for discrete columns, the value otherwise.
  double numeric(std::size_t row) const {
    return is_discrete() ? static_cast<double>(codes[row]) : values[row];
  }

  Column take(std::span<const std::size_t> rows) const {
    Column c;
    c.name = name;
    c.type = type;
    c.role = role;
    c.levels = levels;
    if (is_discrete()) {
      c.codes.reserve(rows.size());
      for (auto r : rows) c.codes.push_back(codes.at(r));
    } else {
      c.values.reserve(rows.size());
      for (auto r : rows) c.values.push_back(values.at(r));
    }
    return c;
  }
};

/// Columnar table. Column order is declaration order and is preserved by
/// every transformation.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<Column> columns) {
    for (auto& c : columns) add_column(std::move(c));
  }

  void add_column(Column c) {
    if (!columns_.empty() && c.size() != rows_)
      fail(ErrorKind::Schema, "column '" + c.name + "' has " + std::to_string(c.size()) +
                                  " rows, expected " + std::to_string(rows_));
    if (columns_.empty()) rows_ = c.size();
    if (!index_.emplace(c.name, columns_.size()).second)
      fail(ErrorKind::Schema, "duplicate column '" + c.name + "'");
    columns_.push_back(std::move(c));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(std::string_view name) const { return columns_[index_of(name)]; }

  std::optional<std::size_t> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(std::string_view name) const {
    auto i = find(name);
    if (!i) fail(ErrorKind::UnknownColumn, "no column named '" + std::string(name) + "'");
    return *i;
  }

  bool contains(std::string_view name) const { return find(name).has_value(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
  }

  Dataset take_rows(std::span<const std::size_t> rows) const {
    Dataset d;
    for (const auto& c : columns_) d.add_column(c.take(rows));
    if (columns_.empty()) d.rows_ = rows.size();
    return d;
  }

  Dataset head(std::size_t n) const { return slice(0, n); }

  Dataset slice(std::size_t begin, std::size_t end) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = begin; i < end && i < rows_; ++i) idx.push_back(i);
    return take_rows(idx);
  }

  Dataset select(std::span<const std::string> names) const {
    Dataset d;
    for (const auto& n : names) d.add_column(column(n));
    return d;
  }

  void replace_column(std::size_t i, Column c) {
    if (c.size() != rows_) fail(ErrorKind::Schema, "replacement column has wrong length");
    if (c.name != columns_.at(i).name) {
      index_.erase(columns_[i].name);
      index_.emplace(c.name, i);
    }
    columns_[i] = std::move(c);
  }

 private:
  std::vector<Column> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t rows_ = 0;
};

}  // namespace cclass
