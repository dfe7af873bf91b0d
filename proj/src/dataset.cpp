#include "clgbn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "clgbn/error.hpp"

namespace clgbn {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string row_tag(std::size_t row) { return "row " + std::to_string(row); }

bool read_record(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> split_line(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (c == delimiter && !quoted) {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------- Dataset

Dataset::Dataset(std::vector<Variable> variables, std::vector<std::vector<double>> columns)
    : variables_(std::move(variables)), columns_(std::move(columns)) {
  if (variables_.size() != columns_.size()) {
    throw DataError("dataset has " + std::to_string(variables_.size()) + " variables but " +
                    std::to_string(columns_.size()) + " columns");
  }
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  std::set<std::string> seen;
  for (std::size_t c = 0; c < variables_.size(); ++c) {
    const auto& var = variables_[c];
    if (!seen.insert(var.name).second) throw DataError("duplicate column '" + var.name + "'");
    if (columns_[c].size() != rows_) throw DataError("column '" + var.name + "' has wrong length");
    for (std::size_t r = 0; r < rows_; ++r) {
      const double v = columns_[c][r];
      if (!std::isfinite(v)) {
        throw DataError("missing or non-finite value in column '" + var.name + "' at " + row_tag(r + 1));
      }
      if (var.discrete()) {
        if (v < 0 || v != std::floor(v) || v >= static_cast<double>(var.levels.size())) {
          throw DataError("invalid level code in column '" + var.name + "' at " + row_tag(r + 1));
        }
      }
    }
    if (var.discrete() && var.levels.empty()) {
      throw DataError("discrete column '" + var.name + "' has no levels");
    }
  }
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
  for (std::size_t c = 0; c < variables_.size(); ++c) {
    if (variables_[c].name == name) return c;
  }
  return std::nullopt;
}

std::size_t Dataset::index_of(std::string_view name) const {
  if (auto c = find(name)) return *c;
  throw DataError("unknown column '" + std::string(name) + "'");
}

std::vector<std::string> Dataset::names() const {
  std::vector<std::string> out;
  out.reserve(variables_.size());
  for (const auto& v : variables_) out.push_back(v.name);
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    cols[c].reserve(rows.size());
    for (const auto r : rows) cols[c].push_back(columns_[c].at(r));
  }
  Dataset out;
  out.variables_ = variables_;
  out.columns_ = std::move(cols);
  out.rows_ = rows.size();
  return out;
}

Dataset Dataset::drop_column(std::string_view name) const {
  const auto idx = index_of(name);
  auto vars = variables_;
  auto cols = columns_;
  vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(idx));
  cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(idx));
  Dataset out;
  out.variables_ = std::move(vars);
  out.columns_ = std::move(cols);
  out.rows_ = rows_;
  return out;
}

std::vector<double> Dataset::row(std::size_t r) const {
  std::vector<double> out(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) out[c] = columns_[c].at(r);
  return out;
}

// ---------------------------------------------------------------- longitudinal table

std::vector<std::string> treatment_levels(TreatmentCoding coding) {
  if (coding == TreatmentCoding::kBinary) return {"untreated", "treated"};
  return {"NT", "TB", "TG"};
}

std::vector<std::string> growth_levels() { return {"Bad", "Good"}; }

std::map<std::string, std::vector<std::string>> canonical_level_order(TreatmentCoding coding) {
  return {{std::string(kTreatmentColumn), treatment_levels(coding)},
          {std::string(kGrowthColumn), growth_levels()}};
}

bool looks_longitudinal(std::string_view header_line, const TableSchema& schema) {
  const auto fields = split_line(header_line, schema.delimiter);
  const bool has_t1 = std::find(fields.begin(), fields.end(), schema.t1) != fields.end();
  const bool has_t2 = std::find(fields.begin(), fields.end(), schema.t2) != fields.end();
  return has_t1 && has_t2;
}

LongitudinalTable load_table(std::istream& in, const TableSchema& schema) {
  std::string line;
  if (!read_record(in, line)) throw DataError("empty input: header row expected");
  const auto header = split_line(line, schema.delimiter);

  auto column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto id_col = column(schema.id);
  const auto t1_col = column(schema.t1);
  const auto t2_col = column(schema.t2);
  const auto tr_col = column(schema.treatment);
  const auto gr_col = column(schema.growth);

  LongitudinalTable table;
  std::vector<std::pair<std::size_t, std::size_t>> feature_cols;
  for (const auto& name : header) {
    const auto& s1 = schema.t1_suffix;
    if (name.size() > s1.size() && name.compare(name.size() - s1.size(), s1.size(), s1) == 0) {
      const auto feature = name.substr(0, name.size() - s1.size());
      feature_cols.emplace_back(column(feature + schema.t1_suffix), column(feature + schema.t2_suffix));
      table.features.push_back(feature);
    }
  }
  for (const auto& name : header) {
    const auto& s2 = schema.t2_suffix;
    if (name.size() > s2.size() && name.compare(name.size() - s2.size(), s2.size(), s2) == 0) {
      const auto feature = name.substr(0, name.size() - s2.size());
      if (std::find(table.features.begin(), table.features.end(), feature) == table.features.end()) {
        column(feature + schema.t1_suffix);  // throws: missing partner column
      }
    }
  }
  if (table.features.empty()) throw DataError("no feature columns ('<feature>" + schema.t1_suffix + "')");

  std::size_t row = 0;
  while (read_record(in, line)) {
    ++row;
    const auto fields = split_line(line, schema.delimiter);
    if (fields.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()) + " at " + row_tag(row));
    }
    auto number = [&](std::size_t col) {
      if (trim(fields[col]).empty()) throw DataError("missing value in '" + header[col] + "' at " + row_tag(row));
      const auto v = parse_double(fields[col]);
      if (!v) throw DataError("non-numeric value '" + fields[col] + "' in '" + header[col] + "' at " + row_tag(row));
      return *v;
    };
    Subject s;
    s.id = fields[id_col];
    if (s.id.empty()) throw DataError("missing id at " + row_tag(row));
    s.t1 = number(t1_col);
    s.t2 = number(t2_col);
    if (!(s.t2 > s.t1)) throw DataError("non-positive ΔT at " + row_tag(row));
    for (const auto& [c1, c2] : feature_cols) {
      s.m1.push_back(number(c1));
      s.m2.push_back(number(c2));
    }
    const auto& tr = fields[tr_col];
    if (tr == "NT") s.treatment = Treatment::kNT;
    else if (tr == "TB") s.treatment = Treatment::kTB;
    else if (tr == "TG") s.treatment = Treatment::kTG;
    else throw DataError("unknown treatment level '" + tr + "' at " + row_tag(row));
    const auto& gr = fields[gr_col];
    if (gr == "Good") s.growth = Growth::kGood;
    else if (gr == "Bad") s.growth = Growth::kBad;
    else throw DataError("unknown growth level '" + gr + "' at " + row_tag(row));
    table.subjects.push_back(std::move(s));
  }
  if (table.subjects.empty()) throw DataError("no data rows");
  return table;
}

DeltaDataset compute_deltas(const LongitudinalTable& table, TreatmentCoding coding) {
  const std::size_t f = table.features.size();
  std::vector<Variable> vars;
  for (const auto& name : table.features) vars.push_back({std::string(kDeltaPrefix) + name, VarType::kContinuous, {}});
  vars.push_back({std::string(kTimeColumn), VarType::kContinuous, {}});
  vars.push_back({std::string(kTreatmentColumn), VarType::kDiscrete, treatment_levels(coding)});
  vars.push_back({std::string(kGrowthColumn), VarType::kDiscrete, growth_levels()});

  std::vector<std::vector<double>> cols(vars.size());
  for (auto& c : cols) c.reserve(table.subjects.size());
  for (const auto& s : table.subjects) {
    for (std::size_t j = 0; j < f; ++j) cols[j].push_back(s.m2.at(j) - s.m1.at(j));
    cols[f].push_back(s.t2 - s.t1);
    double tr = 0.0;
    if (coding == TreatmentCoding::kBinary) {
      tr = s.treatment == Treatment::kNT ? 0.0 : 1.0;
    } else {
      tr = static_cast<double>(static_cast<int>(s.treatment));
    }
    cols[f + 1].push_back(tr);
    cols[f + 2].push_back(s.growth == Growth::kGood ? 1.0 : 0.0);
  }
  return Dataset(std::move(vars), std::move(cols));
}

void write_table(std::ostream& out, const LongitudinalTable& table, const TableSchema& schema) {
  const char d = schema.delimiter;
  out << schema.id << d << schema.t1 << d << schema.t2;
  for (const auto& f : table.features) out << d << f << schema.t1_suffix << d << f << schema.t2_suffix;
  out << d << schema.treatment << d << schema.growth << '\n';
  static constexpr const char* kTreat[] = {"NT", "TB", "TG"};
  for (const auto& s : table.subjects) {
    out << s.id << d << format_double(s.t1) << d << format_double(s.t2);
    for (std::size_t j = 0; j < table.features.size(); ++j) {
      out << d << format_double(s.m1[j]) << d << format_double(s.m2[j]);
    }
    out << d << kTreat[static_cast<int>(s.treatment)] << d << (s.growth == Growth::kGood ? "Good" : "Bad") << '\n';
  }
}

// ---------------------------------------------------------------- atlas

ReferenceAtlas::ReferenceAtlas(std::map<std::string, std::vector<std::pair<double, double>>> table)
    : table_(std::move(table)) {
  for (auto& [feature, entries] : table_) {
    if (entries.empty()) throw DataError("atlas feature '" + feature + "' has no entries");
    std::sort(entries.begin(), entries.end());
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (!(entries[i].first > entries[i - 1].first)) {
        throw DataError("atlas ages for '" + feature + "' are not strictly increasing");
      }
    }
  }
}

double ReferenceAtlas::reference(const std::string& feature, double age) const {
  const auto it = table_.find(feature);
  if (it == table_.end()) throw DataError("atlas has no entries for feature '" + feature + "'");
  const auto& e = it->second;
  if (age <= e.front().first) return e.front().second;
  if (age >= e.back().first) return e.back().second;
  const auto hi = std::upper_bound(e.begin(), e.end(), age,
                                   [](double a, const auto& entry) { return a < entry.first; });
  const auto lo = hi - 1;
  if (lo->first == age) return lo->second;
  const double w = (age - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

ReferenceAtlas load_atlas(std::istream& in, char delimiter) {
  std::string line;
  if (!read_record(in, line)) throw DataError("empty atlas: header row expected");
  const auto header = split_line(line, delimiter);
  auto column = [&](const char* name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(std::string("atlas missing column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto fc = column("feature");
  const auto ac = column("age");
  const auto vc = column("value");
  std::map<std::string, std::vector<std::pair<double, double>>> table;
  std::size_t row = 0;
  while (read_record(in, line)) {
    ++row;
    const auto fields = split_line(line, delimiter);
    if (fields.size() != header.size()) throw DataError("atlas: wrong field count at " + row_tag(row));
    const auto age = parse_double(fields[ac]);
    const auto value = parse_double(fields[vc]);
    if (!age || !value) throw DataError("atlas: non-numeric age or value at " + row_tag(row));
    table[fields[fc]].emplace_back(*age, *value);
  }
  return ReferenceAtlas(std::move(table));
}

LongitudinalTable adjust_with_atlas(const LongitudinalTable& table, const ReferenceAtlas& atlas) {
  for (const auto& f : table.features) {
    if (!atlas.covers(f)) throw DataError("atlas does not cover feature " + f);
  }
  LongitudinalTable out = table;
  for (auto& s : out.subjects) {
    for (std::size_t j = 0; j < out.features.size(); ++j) {
      s.m1[j] -= atlas.reference(out.features[j], s.t1);
      s.m2[j] -= atlas.reference(out.features[j], s.t2);
    }
  }
  return out;
}

// ---------------------------------------------------------------- modeling table io

Dataset read_dataset(std::istream& in, char delimiter,
                     const std::map<std::string, std::vector<std::string>>& level_order) {
  std::string line;
  if (!read_record(in, line)) throw DataError("empty input: header row expected");
  const auto header = split_line(line, delimiter);
  std::vector<std::vector<std::string>> raw(header.size());
  std::size_t row = 0;
  while (read_record(in, line)) {
    ++row;
    auto fields = split_line(line, delimiter);
    if (fields.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()) + " at " + row_tag(row));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (fields[c].empty()) throw DataError("missing value in '" + header[c] + "' at " + row_tag(row));
      raw[c].push_back(std::move(fields[c]));
    }
  }
  if (row == 0) throw DataError("no data rows");

  std::vector<Variable> vars;
  std::vector<std::vector<double>> cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    std::vector<double> numeric;
    numeric.reserve(raw[c].size());
    bool all_numeric = !level_order.contains(header[c]);
    for (const auto& s : raw[c]) {
      if (!all_numeric) break;
      if (auto v = parse_double(s)) numeric.push_back(*v);
      else all_numeric = false;
    }
    if (all_numeric) {
      vars.push_back({header[c], VarType::kContinuous, {}});
      cols.push_back(std::move(numeric));
      continue;
    }
    std::vector<std::string> levels;
    if (auto it = level_order.find(header[c]); it != level_order.end()) {
      levels = it->second;
    } else {
      std::set<std::string> uniq(raw[c].begin(), raw[c].end());
      levels.assign(uniq.begin(), uniq.end());
    }
    std::vector<double> codes;
    codes.reserve(raw[c].size());
    for (std::size_t r = 0; r < raw[c].size(); ++r) {
      const auto it = std::find(levels.begin(), levels.end(), raw[c][r]);
      if (it == levels.end()) {
        throw DataError("unknown level '" + raw[c][r] + "' in '" + header[c] + "' at " + row_tag(r + 1));
      }
      codes.push_back(static_cast<double>(it - levels.begin()));
    }
    vars.push_back({header[c], VarType::kDiscrete, std::move(levels)});
    cols.push_back(std::move(codes));
  }
  return Dataset(std::move(vars), std::move(cols));
}

void write_dataset(std::ostream& out, const Dataset& data, char delimiter) {
  for (std::size_t c = 0; c < data.cols(); ++c) out << (c ? std::string(1, delimiter) : "") << data.variable(c).name;
  out << '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      if (c) out << delimiter;
      const auto& var = data.variable(c);
      const double v = data.at(r, c);
      if (var.discrete()) out << var.levels[static_cast<std::size_t>(v)];
      else out << format_double(v);
    }
    out << '\n';
  }
}

}  // namespace clgbn
