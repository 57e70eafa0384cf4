#pragma once

// CSV tables with a JSON schema sidecar, plus small text/number helpers
// shared by every file format in the project.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cclass/dataset.hpp"
#include "cclass/error.hpp"

namespace cclass {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// 64-bit FNV-1a, rendered as 16 hex digits. Stable across platforms.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Schema, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// ---- CSV ------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. CRLF line endings are accepted. The header row is mandatory.
inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size())
          fail(ErrorKind::Schema, "CSV line " + std::to_string(line) + " has " +
                                      std::to_string(record.size()) + " fields, header has " +
                                      std::to_string(table.header.size()));
        table.rows.push_back(std::move(record));
      }
    }
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\r') {
      // tolerated before '\n'
    } else if (c == '\n') {
      end_record();
      ++line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) fail(ErrorKind::Schema, "CSV ends inside a quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  if (table.header.empty()) fail(ErrorKind::Schema, "CSV has no header row");
  return table;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

// ---- schema ---------------------------------------------------------------

struct ColumnSchema {
  std::string name;
  ColumnType type = ColumnType::continuous;
  Role role = Role::covariate;
  std::vector<std::string> levels;  // optional for discrete columns
};

using Schema = std::vector<ColumnSchema>;

inline Schema schema_of(const Dataset& d) {
  Schema s;
  for (const auto& c : d.columns()) s.push_back({c.name, c.type, c.role, c.levels});
  return s;
}

inline nlohmann::json to_json(const Schema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema) {
    nlohmann::json j = {{"name", c.name}, {"type", to_string(c.type)}, {"role", to_string(c.role)}};
    if (c.type != ColumnType::continuous) j["levels"] = c.levels;
    cols.push_back(std::move(j));
  }
  return {{"columns", std::move(cols)}};
}

inline Schema schema_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("columns") || !j["columns"].is_array())
    fail(ErrorKind::Schema, "schema needs a 'columns' array");
  Schema s;
  for (const auto& c : j["columns"]) {
    ColumnSchema cs;
    if (!c.contains("name") || !c["name"].is_string())
      fail(ErrorKind::Schema, "schema column without a name");
    cs.name = c["name"].get<std::string>();
    const auto type = parse_column_type(c.value("type", std::string("continuous")));
    if (!type) fail(ErrorKind::Schema, "column '" + cs.name + "': unknown type");
    cs.type = *type;
    const auto role = parse_role(c.value("role", std::string("covariate")));
    if (!role) fail(ErrorKind::Schema, "column '" + cs.name + "': unknown role");
    cs.role = *role;
    if (c.contains("levels"))
      for (const auto& l : c["levels"]) cs.levels.push_back(l.get<std::string>());
    if (cs.type == ColumnType::binary && !cs.levels.empty() && cs.levels.size() != 2)
      fail(ErrorKind::Schema, "binary column '" + cs.name + "' must have exactly 2 levels");
    s.push_back(std::move(cs));
  }
  return s;
}

namespace detail {

// Integer-looking labels sort numerically, anything else lexicographically.
inline void sort_levels(std::vector<std::string>& levels) {
  const bool numeric = std::all_of(levels.begin(), levels.end(),
                                   [](const std::string& l) { return parse_integer(l).has_value(); });
  if (numeric)
    std::sort(levels.begin(), levels.end(),
              [](const std::string& a, const std::string& b) { return *parse_integer(a) < *parse_integer(b); });
  else
    std::sort(levels.begin(), levels.end());
}

inline ColumnSchema infer_column(const std::string& name, const std::vector<std::string>& cells) {
  std::set<std::string> distinct;
  bool all_int = true;
  bool all_num = true;
  for (const auto& v : cells) {
    if (v.empty()) continue;
    distinct.insert(v);
    if (!parse_integer(v)) all_int = false;
    if (!parse_double(v)) all_num = false;
  }
  ColumnSchema cs;
  cs.name = name;
  if (all_num && !(all_int && distinct.size() <= 20)) {
    cs.type = ColumnType::continuous;
    return cs;
  }
  cs.levels.assign(distinct.begin(), distinct.end());
  sort_levels(cs.levels);
  cs.type = cs.levels.size() == 2 ? ColumnType::binary : ColumnType::categorical;
  return cs;
}

}  // namespace detail

/// Builds a Dataset from CSV text. With a schema, columns must match it by
/// name and values are validated against declared types and levels; without
/// one, types are inferred (integers with at most 20 distinct values are
/// categorical, other numbers continuous, anything else categorical).
inline Dataset dataset_from_csv(std::string_view text, const std::optional<Schema>& schema = std::nullopt) {
  const CsvTable table = parse_csv(text);
  const std::size_t n = table.rows.size();
  std::map<std::string, std::size_t> header_pos;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (!header_pos.emplace(table.header[i], i).second)
      fail(ErrorKind::Schema, "duplicate CSV column '" + table.header[i] + "'");

  auto cells_of = [&](std::size_t col) {
    std::vector<std::string> cells;
    cells.reserve(n);
    for (const auto& r : table.rows) cells.push_back(r[col]);
    return cells;
  };

  Schema resolved;
  if (schema) {
    for (const auto& cs : *schema)
      if (!header_pos.count(cs.name))
        fail(ErrorKind::Schema, "column '" + cs.name + "' declared in schema but absent from CSV");
    if (schema->size() != table.header.size()) {
      for (const auto& h : table.header) {
        const bool declared = std::any_of(schema->begin(), schema->end(),
                                          [&](const ColumnSchema& cs) { return cs.name == h; });
        if (!declared) fail(ErrorKind::Schema, "CSV column '" + h + "' is not declared in the schema");
      }
    }
    resolved = *schema;
  } else {
    for (std::size_t i = 0; i < table.header.size(); ++i)
      resolved.push_back(detail::infer_column(table.header[i], cells_of(i)));
  }

  Dataset d;
  for (auto cs : resolved) {
    const auto cells = cells_of(header_pos.at(cs.name));
    if (cs.type == ColumnType::continuous) {
      std::vector<double> values;
      values.reserve(n);
      for (std::size_t r = 0; r < n; ++r) {
        if (cells[r].empty()) {
          values.push_back(std::nan(""));
          continue;
        }
        auto v = parse_double(cells[r]);
        if (!v)
          fail(ErrorKind::Schema, "column '" + cs.name + "' row " + std::to_string(r) + ": '" + cells[r] +
                                      "' is not a number");
        values.push_back(*v);
      }
      d.add_column(Column::continuous(cs.name, std::move(values), cs.role));
      continue;
    }
    if (cs.levels.empty()) {
      std::set<std::string> distinct;
      for (const auto& v : cells)
        if (!v.empty()) distinct.insert(v);
      cs.levels.assign(distinct.begin(), distinct.end());
      detail::sort_levels(cs.levels);
      if (cs.type == ColumnType::binary && cs.levels.size() < 2) {
        if (cs.levels.empty() || cs.levels[0] == "0" || cs.levels[0] == "1")
          cs.levels = {"0", "1"};
        else
          fail(ErrorKind::Schema, "binary column '" + cs.name + "' needs declared levels");
      }
      if (cs.type == ColumnType::binary && cs.levels.size() > 2)
        fail(ErrorKind::Schema, "binary column '" + cs.name + "' has " + std::to_string(cs.levels.size()) +
                                    " distinct values");
    }
    std::map<std::string, int> lookup;
    for (std::size_t k = 0; k < cs.levels.size(); ++k) lookup.emplace(cs.levels[k], static_cast<int>(k));
    std::vector<int> codes;
    codes.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      if (cells[r].empty()) {
        codes.push_back(kMissingCode);
        continue;
      }
      auto it = lookup.find(cells[r]);
      if (it == lookup.end())
        fail(ErrorKind::Schema, "column '" + cs.name + "' row " + std::to_string(r) + ": value '" + cells[r] +
                                    "' is not one of its declared levels");
      codes.push_back(it->second);
    }
    Column c = Column::categorical(cs.name, cs.levels, std::move(codes), cs.role);
    if (cs.type == ColumnType::categorical) c.type = ColumnType::categorical;
    d.add_column(std::move(c));
  }
  return d;
}

inline std::string dataset_to_csv(const Dataset& d) {
  std::string out = csv_line(d.names());
  std::vector<std::string> fields(d.cols());
  for (std::size_t r = 0; r < d.rows(); ++r) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      const Column& c = d.column(j);
      if (c.is_missing(r))
        fields[j].clear();
      else if (c.is_discrete())
        fields[j] = c.levels[static_cast<std::size_t>(c.codes[r])];
      else
        fields[j] = format_double(c.values[r]);
    }
    out += csv_line(fields);
  }
  return out;
}

/// Conventional sidecar location: data.csv -> data.schema.json.
inline std::filesystem::path schema_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".schema.json");
  return p;
}

inline Dataset load_dataset(const std::filesystem::path& csv, std::optional<std::filesystem::path> schema = std::nullopt) {
  if (!schema) {
    auto guess = schema_path_for(csv);
    if (std::filesystem::exists(guess)) schema = guess;
  }
  std::optional<Schema> s;
  if (schema) s = schema_from_json(read_json_file(*schema));
  return dataset_from_csv(read_text_file(csv), s);
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& csv) {
  write_text_file(csv, dataset_to_csv(d));
  write_text_file(schema_path_for(csv), to_json(schema_of(d)).dump(2) + "\n");
}

}  // namespace cclass
