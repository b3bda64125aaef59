#include "concert/cli/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include "concert/errors.hpp"

namespace concert::cli {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

std::vector<SampleSet> parse_samples(std::istream& in, const std::vector<std::string>& columns,
                                     const std::string& source, bool allow_blank) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source + ": empty file");
  std::string_view header = line;
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);

  std::vector<std::string> names;
  for (auto cell : split(header)) names.emplace_back(unquote(cell));

  std::vector<std::size_t> index;
  std::vector<SampleSet> out;
  for (const auto& col : columns) {
    const auto it = std::find(names.begin(), names.end(), col);
    if (it == names.end()) throw ParseError(source + ": missing column '" + col + "'", 0, col);
    index.push_back(static_cast<std::size_t>(it - names.begin()));
    out.push_back({source + ":" + col, {}});
  }

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line);
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const std::string_view cell = index[k] < cells.size() ? cells[index[k]] : std::string_view{};
      if (cell.empty()) {
        if (allow_blank) continue;
        throw ParseError(source + ": row " + std::to_string(row) + ", column '" + columns[k] +
                             "': empty cell",
                         row, columns[k]);
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(source + ": row " + std::to_string(row) + ", column '" + columns[k] +
                             "': not a finite number: '" + std::string(cell) + "'",
                         row, columns[k]);
      }
      out[k].values.push_back(v);
    }
  }
  if (row == 0) throw ParseError(source + ": no data rows");
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (out[k].values.empty()) {
      throw ParseError(source + ": column '" + columns[k] + "' has no values", 0, columns[k]);
    }
  }
  return out;
}

std::vector<SampleSet> ingest_samples(const std::string& path,
                                      const std::vector<std::string>& columns, bool allow_blank) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open sample file '" + path + "'");
  return parse_samples(in, columns, path, allow_blank);
}

}  // namespace concert::cli
