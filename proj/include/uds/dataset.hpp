#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace uds {

// Raised for malformed or invalid input data (as opposed to bad arguments,
// which use std::invalid_argument).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable column-major table of finite doubles. The stable sort order of
// every column (its rank index) is computed at construction and shared by
// all entropy computations.
class Dataset {
 public:
  Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns)
      : names_(std::move(names)), columns_(std::move(columns)) {
    if (names_.size() != columns_.size())
      throw DataError("column name count does not match column count");
    if (columns_.empty()) throw DataError("dataset has no columns");
    const std::size_t m = columns_.front().size();
    if (m < 2) throw DataError("m >= 2 required (dataset has " + std::to_string(m) + " records)");

    std::unordered_set<std::string_view> seen;
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (names_[c].empty()) throw DataError("column " + std::to_string(c + 1) + " has an empty name");
      if (!seen.insert(names_[c]).second) throw DataError("duplicate column name '" + names_[c] + "'");
      if (columns_[c].size() != m)
        throw DataError("column '" + names_[c] + "' has " + std::to_string(columns_[c].size()) +
                        " values, expected " + std::to_string(m));
      for (std::size_t r = 0; r < m; ++r)
        if (!std::isfinite(columns_[c][r]))
          throw DataError("non-finite value in column '" + names_[c] + "' at record " + std::to_string(r + 1));
    }

    ranks_.reserve(columns_.size());
    for (const auto& col : columns_) {
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&col](std::size_t a, std::size_t b) { return col[a] < col[b]; });
      ranks_.push_back(std::move(order));
    }
  }

  // Synthesizes names "col1".."colN".
  explicit Dataset(std::vector<std::vector<double>> columns) : Dataset(named(std::move(columns))) {}

  std::size_t rows() const { return columns_.front().size(); }
  std::size_t cols() const { return columns_.size(); }

  std::span<const double> column(std::size_t c) const { return columns_.at(c); }
  const std::string& name(std::size_t c) const { return names_.at(c); }
  const std::vector<std::string>& names() const { return names_; }

  // Record indices (0-based) in non-decreasing value order, ties by index.
  std::span<const std::size_t> rank_index(std::size_t c) const {
    if (c >= ranks_.size())
      throw std::invalid_argument("invalid column id " + std::to_string(c));
    return ranks_[c];
  }

  std::optional<std::size_t> find(std::string_view column_name) const {
    for (std::size_t c = 0; c < names_.size(); ++c)
      if (names_[c] == column_name) return c;
    return std::nullopt;
  }

  static std::vector<std::string> default_names(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) out.push_back("col" + std::to_string(i));
    return out;
  }

 private:
  using Named = std::pair<std::vector<std::string>, std::vector<std::vector<double>>>;
  static Named named(std::vector<std::vector<double>> columns) {
    auto names = default_names(columns.size());
    return {std::move(names), std::move(columns)};
  }
  explicit Dataset(Named&& parts) : Dataset(std::move(parts.first), std::move(parts.second)) {}

  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::vector<std::size_t>> ranks_;
};

inline std::span<const std::size_t> rank_index(const Dataset& data, std::size_t column) {
  return data.rank_index(column);
}

struct CsvOptions {
  bool has_header = true;
  char delimiter = ',';
  // Drop whole rows containing an empty or NA/NaN cell instead of failing.
  bool drop_na = false;
};

namespace detail {

struct CsvRecord {
  std::size_t line;
  std::vector<std::string> fields;
};

// RFC-4180 style splitter: quoted fields may contain delimiters, doubled
// quotes and line breaks. Blank lines are skipped.
inline std::vector<CsvRecord> split_csv(std::string_view text, char delim) {
  std::vector<CsvRecord> records;
  CsvRecord current{1, {}};
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    const bool blank = current.fields.empty() && field.empty() && !field_started;
    if (!blank) {
      end_field();
      records.push_back(std::move(current));
    }
    current = CsvRecord{line + 1, {}};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
    } else if (ch == '"' && field.find_first_not_of(" \t") == std::string::npos) {
      field.clear();
      in_quotes = true;
      field_started = true;
    } else if (ch == delim) {
      end_field();
      field_started = true;
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      continue;
    } else if (ch == '\n') {
      end_record();
      ++line;
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) throw DataError("unterminated quoted field starting near line " + std::to_string(current.line));
  if (!current.fields.empty() || !field.empty() || field_started) {
    end_field();
    records.push_back(std::move(current));
  }
  return records;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline bool is_na(std::string_view cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "NAN" || cell == "na";
}

inline std::optional<double> parse_double(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
  if (cell.empty() || ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

}  // namespace detail

inline Dataset parse_csv(std::string_view text, const CsvOptions& options = {}) {
  auto records = detail::split_csv(text, options.delimiter);
  if (records.empty()) throw DataError("input contains no rows");

  std::vector<std::string> names;
  std::size_t first_data = 0;
  const std::size_t arity = records.front().fields.size();
  if (options.has_header) {
    for (const auto& f : records.front().fields) names.emplace_back(detail::trim(f));
    first_data = 1;
  } else {
    names = Dataset::default_names(arity);
  }

  std::vector<std::vector<double>> columns(arity);
  for (std::size_t r = first_data; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != arity)
      throw DataError("line " + std::to_string(rec.line) + ": expected " + std::to_string(arity) +
                      " fields, found " + std::to_string(rec.fields.size()));
    std::vector<double> row(arity);
    bool drop = false;
    for (std::size_t c = 0; c < arity; ++c) {
      const auto cell = detail::trim(rec.fields[c]);
      const auto where = "line " + std::to_string(rec.line) + ", column " + std::to_string(c + 1) +
                         " ('" + names[c] + "')";
      if (options.drop_na && detail::is_na(cell)) {
        drop = true;
        break;
      }
      const auto value = detail::parse_double(cell);
      if (!value) throw DataError(where + ": cannot parse '" + std::string(cell) + "' as a number");
      if (!std::isfinite(*value)) throw DataError(where + ": non-finite value '" + std::string(cell) + "'");
      row[c] = *value;
    }
    if (drop) continue;
    for (std::size_t c = 0; c < arity; ++c) columns[c].push_back(row[c]);
  }
  return Dataset(std::move(names), std::move(columns));
}

inline Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), options);
}

// Writes values in shortest round-trip form, so reloading is bit-exact.
inline void write_csv(const Dataset& data, std::ostream& out, char delimiter = ',') {
  for (std::size_t c = 0; c < data.cols(); ++c) {
    if (c) out << delimiter;
    out << data.name(c);
  }
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      if (c) out << delimiter;
      const auto res = std::to_chars(buf, buf + sizeof buf, data.column(c)[r]);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace uds
