#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "adsieve/error.hpp"
#include "adsieve/features.hpp"

namespace adsieve {

namespace {

std::vector<std::string> SplitCsv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double ParseNumber(const std::string& s, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw DatasetError("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string FormatNumber(double v) {
  if (v == 0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void Dataset::Append(const Dataset& other) {
  if (rows.empty() && schema.features.empty()) schema = other.schema;
  if (!(schema == other.schema))
    throw DatasetError("schema mismatch: '" + schema.version + "' vs '" +
                       other.schema.version + "'");
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::vector<std::string> Dataset::Pages() const {
  std::vector<std::string> pages;
  std::unordered_set<std::string> seen;
  for (const DatasetRow& r : rows)
    if (seen.insert(r.page).second) pages.push_back(r.page);
  return pages;
}

Dataset Dataset::Select(const std::set<FeatureFamily>& families) const {
  const std::vector<std::size_t> cols = schema.Columns(families);
  Dataset out;
  out.schema.version = schema.version + "/";
  for (FeatureFamily f : kAllFamilies) {
    if (families.contains(f)) {
      out.schema.version += std::string(ToString(f)).substr(0, 1);
    }
  }
  for (std::size_t c : cols) out.schema.features.push_back(schema.features[c]);
  out.rows.reserve(rows.size());
  for (const DatasetRow& r : rows) {
    DatasetRow row;
    row.page = r.page;
    row.node_id = r.node_id;
    row.label = r.label;
    row.values.reserve(cols.size());
    for (std::size_t c : cols) row.values.push_back(r.values[c]);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string DatasetToCsv(const Dataset& data, std::string_view config_hash) {
  std::string out;
  out += "# schema=" + data.schema.version;
  if (!config_hash.empty()) out += " config_hash=" + std::string(config_hash);
  out += "\n";
  for (const FeatureSpec& f : data.schema.features) out += f.name + ",";
  out += "label,page,node_id\n";
  for (const DatasetRow& r : data.rows) {
    for (double v : r.values) out += FormatNumber(v) + ",";
    out += std::string(ToString(r.label)) + "," + r.page + "," + std::to_string(r.node_id) + "\n";
  }
  return out;
}

Dataset DatasetFromCsv(std::string_view text) {
  Dataset data;
  std::size_t pos = 0, line_no = 0;
  bool have_header = false;
  std::string version = DefaultSchema().version;
  std::size_t width = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.starts_with("#")) {
      if (auto at = line.find("schema="); at != std::string_view::npos) {
        std::string_view rest = line.substr(at + 7);
        version = std::string(rest.substr(0, rest.find(' ')));
      }
      continue;
    }
    auto cells = SplitCsv(line);
    if (!have_header) {
      if (cells.size() < 3 || cells[cells.size() - 3] != "label" ||
          cells[cells.size() - 2] != "page" || cells.back() != "node_id")
        throw DatasetError("header must end with label,page,node_id");
      width = cells.size() - 3;
      data.schema.version = version;
      // Known names keep their family; unknown columns are rejected.
      for (std::size_t i = 0; i < width; ++i) {
        auto idx = DefaultSchema().IndexOf(cells[i]);
        if (!idx) throw DatasetError("unknown feature column '" + cells[i] + "'");
        data.schema.features.push_back(DefaultSchema().features[*idx]);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != width + 3)
      throw DatasetError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(width + 3) + " cells");
    DatasetRow row;
    row.values.reserve(width);
    for (std::size_t i = 0; i < width; ++i) row.values.push_back(ParseNumber(cells[i], line_no));
    auto label = ParseLabel(cells[width]);
    if (!label) throw DatasetError("line " + std::to_string(line_no) + ": bad label");
    row.label = *label;
    row.page = cells[width + 1];
    row.node_id = static_cast<NodeId>(ParseNumber(cells[width + 2], line_no));
    data.rows.push_back(std::move(row));
  }
  if (!have_header) throw DatasetError("missing header");
  return data;
}

std::string CdfCsv(const Dataset& data, std::size_t column, Label label,
                   std::string_view config_hash) {
  std::vector<double> values;
  for (const DatasetRow& r : data.rows)
    if (r.label == label) values.push_back(r.values.at(column));
  std::sort(values.begin(), values.end());
  std::string out;
  if (!config_hash.empty()) out += "# config_hash=" + std::string(config_hash) + "\n";
  out += "value,cdf\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out += FormatNumber(values[i]) + "," +
           FormatNumber(static_cast<double>(i + 1) / static_cast<double>(values.size())) + "\n";
  }
  return out;
}

}  // namespace adsieve
