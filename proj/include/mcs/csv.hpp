#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mcs/dataset.hpp"
#include "mcs/error.hpp"

namespace mcs {

// Column selector: header name or zero-based position.
using ColumnRef = std::variant<std::string, Index>;

struct CsvOptions {
  std::vector<std::string> categorical;  // one-hot encoded, first level dropped
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace detail

inline Dataset parse_csv(std::istream& in, const ColumnRef& target, Task task,
                         const CsvOptions& options = {}, const std::string& source = "<stream>") {
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    header = detail::split_csv_line(line);
    break;
  }
  if (header.empty()) throw DataError(source + ": empty file (no header row)");
  if (header.size() >= 1 && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  for (auto& h : header) h = detail::trim(h);

  Index target_col = -1;
  if (const auto* name = std::get_if<std::string>(&target)) {
    auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) throw DataError(source + ": target column '" + *name + "' not found");
    target_col = static_cast<Index>(it - header.begin());
  } else {
    target_col = std::get<Index>(target);
    if (target_col < 0 || target_col >= static_cast<Index>(header.size())) {
      throw DataError(source + ": target column index " + std::to_string(target_col) +
                      " out of range (" + std::to_string(header.size()) + " columns)");
    }
  }

  std::set<std::string> categorical(options.categorical.begin(), options.categorical.end());
  for (const auto& c : categorical) {
    if (std::find(header.begin(), header.end(), c) == header.end()) {
      throw DataError(source + ": categorical column '" + c + "' not found");
    }
    if (c == header[static_cast<std::size_t>(target_col)]) {
      throw DataError(source + ": target column cannot be declared categorical");
    }
  }

  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> line_of_row;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    auto row = detail::split_csv_line(line);
    if (row.size() != header.size()) {
      throw DataError(source + ": line " + std::to_string(line_no) + " has " +
                      std::to_string(row.size()) + " cells, header has " +
                      std::to_string(header.size()));
    }
    for (auto& c : row) c = detail::trim(c);
    cells.push_back(std::move(row));
    line_of_row.push_back(line_no);
  }
  if (cells.empty()) throw DataError(source + ": empty file (no data rows)");

  const auto n = static_cast<Index>(cells.size());
  // Output column layout: numeric columns keep their position, categorical
  // columns expand into one indicator per non-baseline level.
  struct OutColumn {
    std::size_t source;
    std::string level;  // empty for numeric columns
  };
  std::vector<OutColumn> layout;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<Index>(c) == target_col) continue;
    if (categorical.count(header[c])) {
      std::set<std::string> levels;
      for (const auto& row : cells) levels.insert(row[c]);
      auto it = levels.begin();
      if (it != levels.end()) ++it;  // lexicographically first level dropped
      for (; it != levels.end(); ++it) {
        layout.push_back({c, *it});
        names.push_back(header[c] + "=" + *it);
      }
    } else {
      layout.push_back({c, {}});
      names.push_back(header[c]);
    }
  }

  Eigen::MatrixXd x(n, static_cast<Index>(layout.size()));
  Eigen::VectorXd y(n);
  auto cell_error = [&](Index r, std::size_t c, const std::string& why) {
    return DataError(source + ": " + why + " at line " + std::to_string(line_of_row[r]) +
                     " (data row " + std::to_string(r) + "), column '" + header[c] + "': '" +
                     cells[r][c] + "'");
  };
  for (Index r = 0; r < n; ++r) {
    const auto& row = cells[static_cast<std::size_t>(r)];
    for (std::size_t j = 0; j < layout.size(); ++j) {
      const auto& col = layout[j];
      double v = 0.0;
      if (!col.level.empty()) {
        v = row[col.source] == col.level ? 1.0 : 0.0;
      } else {
        if (!detail::parse_double(row[col.source], v)) throw cell_error(r, col.source, "non-numeric cell");
        if (!std::isfinite(v)) throw cell_error(r, col.source, "non-finite value");
      }
      x(r, static_cast<Index>(j)) = v;
    }
    const auto tc = static_cast<std::size_t>(target_col);
    double v = 0.0;
    if (!detail::parse_double(row[tc], v)) throw cell_error(r, tc, "non-numeric cell");
    if (!std::isfinite(v)) throw cell_error(r, tc, "non-finite value");
    if (task == Task::classification && v != 0.0 && v != 1.0) {
      throw cell_error(r, tc, "classification label not in {0,1}");
    }
    y(r) = v;
  }
  return Dataset(std::move(x), std::move(y), task, std::move(names));
}

inline Dataset load_csv(const std::filesystem::path& path, const ColumnRef& target, Task task,
                        const CsvOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file '" + path.string() + "'");
  return parse_csv(in, target, task, options, path.string());
}

inline void write_csv(std::ostream& out, const Dataset& data, const std::string& target_name = "y") {
  const auto& names = data.column_names();
  for (Index j = 0; j < data.cols(); ++j) {
    out << (names.empty() ? "x" + std::to_string(j) : names[static_cast<std::size_t>(j)]) << ',';
  }
  out << target_name << '\n';
  out.precision(17);
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) out << data.features()(i, j) << ',';
    out << data.target()(i) << '\n';
  }
}

}  // namespace mcs
