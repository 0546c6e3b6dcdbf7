#pragma once

// Tabular experiment output: metadata, a fixed column schema and rows of
// numeric or text cells, written as CSV (with `# key=value` comment lines)
// or JSON.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

namespace seqid::bench {

inline constexpr const char* kVersion = "0.1.0";

using Cell = std::variant<double, std::int64_t, std::string>;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, end);
}

inline std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size())
      throw std::logic_error("ResultTable: row has " + std::to_string(row.size()) + " cells, schema has " +
                             std::to_string(columns_.size()));
    rows_.push_back(std::move(row));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i] == name) return i;
    throw std::out_of_range("ResultTable: no column \"" + name + "\"");
  }

  /// Numeric value of a cell (integers widen to double).
  double number(std::size_t row, const std::string& col) const {
    const Cell& c = rows_.at(row).at(column(col));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    throw std::invalid_argument("ResultTable: cell " + col + " is not numeric");
  }

  // Ordered metadata, written as `# key=value` lines.
  void set_meta(const std::string& key, const std::string& value) {
    for (auto& kv : meta_)
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    meta_.emplace_back(key, value);
  }
  const std::vector<std::pair<std::string, std::string>>& meta() const { return meta_; }
  std::string meta_value(const std::string& key) const {
    for (const auto& kv : meta_)
      if (kv.first == key) return kv.second;
    return {};
  }

  void write_csv(std::ostream& out) const {
    for (const auto& [k, v] : meta_) out << "# " << k << '=' << v << '\n';
    write_csv_body(out);
  }

  /// Header row and data rows only.
  void write_csv_body(std::ostream& out) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
      out << '\n';
    }
  }

  std::string csv() const {
    std::ostringstream ss;
    write_csv(ss);
    return ss.str();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["metadata"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : meta_) j["metadata"][k] = v;
    j["columns"] = columns_;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : rows_) {
      auto r = nlohmann::ordered_json::array();
      for (const auto& c : row) {
        if (const auto* d = std::get_if<double>(&c)) {
          if (std::isfinite(*d))
            r.push_back(*d);
          else
            r.push_back(format_double(*d));
        } else if (const auto* i = std::get_if<std::int64_t>(&c)) {
          r.push_back(*i);
        } else {
          r.push_back(std::get<std::string>(c));
        }
      }
      rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
  }

  void write_json(std::ostream& out) const { out << to_json().dump(2) << '\n'; }

  /// Parses CSV written by write_csv. Integral text becomes int64, other
  /// numeric text double, the rest strings.
  static ResultTable read_csv(std::istream& in) {
    ResultTable t;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (!header && line.rfind("# ", 0) == 0) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::runtime_error("read_csv: malformed metadata line: " + line);
        t.set_meta(line.substr(2, eq - 2), line.substr(eq + 1));
        continue;
      }
      auto fields = split(line);
      if (!header) {
        t.columns_ = std::move(fields);
        header = true;
        continue;
      }
      std::vector<Cell> row;
      for (auto& f : fields) row.push_back(parse_cell(f));
      t.add_row(std::move(row));
    }
    if (!header) throw std::runtime_error("read_csv: no header row");
    return t;
  }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') {
        out.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    out.push_back(std::move(cur));
    return out;
  }

  static Cell parse_cell(const std::string& s) {
    std::int64_t i;
    auto [pi, ei] = std::from_chars(s.data(), s.data() + s.size(), i);
    if (ei == std::errc() && pi == s.data() + s.size()) return i;
    double d;
    auto [pd, ed] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ed == std::errc() && pd == s.data() + s.size()) return d;
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    return s;
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::pair<std::string, std::string>> meta_;
};

}  // namespace seqid::bench
