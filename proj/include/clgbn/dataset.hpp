#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clgbn {

enum class VarType { kContinuous, kDiscrete };

struct Variable {
  std::string name;
  VarType type = VarType::kContinuous;
  std::vector<std::string> levels;  // discrete only; value = index into levels

  bool discrete() const { return type == VarType::kDiscrete; }
  bool operator==(const Variable&) const = default;
};

/// Column-major modeling table. Discrete values are stored as exact level codes.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Variable> variables, std::vector<std::vector<double>> columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return variables_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(std::size_t col) const { return variables_.at(col); }
  std::span<const double> column(std::size_t col) const { return columns_.at(col); }
  double at(std::size_t row, std::size_t col) const { return columns_[col][row]; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Throws DataError naming the column when absent.
  std::size_t index_of(std::string_view name) const;
  std::vector<std::string> names() const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset drop_column(std::string_view name) const;
  std::vector<double> row(std::size_t r) const;

 private:
  std::vector<Variable> variables_;
  std::vector<std::vector<double>> columns_;
  std::size_t rows_ = 0;
};

using DeltaDataset = Dataset;

enum class Treatment { kNT, kTB, kTG };
enum class Growth { kGood, kBad };
enum class TreatmentCoding { kBinary, kThreeLevel };

struct Subject {
  std::string id;
  double t1 = 0.0;
  double t2 = 0.0;
  std::vector<double> m1;  // aligned with LongitudinalTable::features
  std::vector<double> m2;
  Treatment treatment = Treatment::kNT;
  Growth growth = Growth::kGood;
};

struct LongitudinalTable {
  std::vector<std::string> features;
  std::vector<Subject> subjects;
};

/// Column names of the raw longitudinal file. Feature columns are `<feature><t1_suffix>` and
/// `<feature><t2_suffix>`; every such pair in the header becomes a feature.
struct TableSchema {
  std::string id = "id";
  std::string t1 = "t1";
  std::string t2 = "t2";
  std::string treatment = "treatment";
  std::string growth = "growth";
  std::string t1_suffix = "_t1";
  std::string t2_suffix = "_t2";
  char delimiter = ',';
};

// Canonical modeling-table names.
inline constexpr std::string_view kDeltaPrefix = "d";
inline constexpr std::string_view kTimeColumn = "dT";
inline constexpr std::string_view kTreatmentColumn = "Treatment";
inline constexpr std::string_view kGrowthColumn = "Growth";

std::vector<std::string> treatment_levels(TreatmentCoding coding);
std::vector<std::string> growth_levels();

LongitudinalTable load_table(std::istream& in, const TableSchema& schema = {});
DeltaDataset compute_deltas(const LongitudinalTable& table,
                            TreatmentCoding coding = TreatmentCoding::kBinary);

class ReferenceAtlas {
 public:
  /// Entries per feature; ages need not be sorted but must be distinct.
  explicit ReferenceAtlas(std::map<std::string, std::vector<std::pair<double, double>>> table);

  bool covers(const std::string& feature) const { return table_.contains(feature); }
  /// Linear interpolation between tabulated ages, clamped to the end points.
  double reference(const std::string& feature, double age) const;
  const std::map<std::string, std::vector<std::pair<double, double>>>& table() const { return table_; }

 private:
  std::map<std::string, std::vector<std::pair<double, double>>> table_;
};

ReferenceAtlas load_atlas(std::istream& in, char delimiter = ',');
LongitudinalTable adjust_with_atlas(const LongitudinalTable& table, const ReferenceAtlas& atlas);

void write_table(std::ostream& out, const LongitudinalTable& table, const TableSchema& schema = {});

/// Reads a modeling table: numeric columns become continuous, others discrete.
/// Discrete levels follow `level_order` when given for that column, sorted order otherwise.
Dataset read_dataset(std::istream& in, char delimiter = ',',
                     const std::map<std::string, std::vector<std::string>>& level_order = {});
void write_dataset(std::ostream& out, const Dataset& data, char delimiter = ',');

/// Level orders for the canonical discrete columns (both codings merged).
std::map<std::string, std::vector<std::string>> canonical_level_order(TreatmentCoding coding);

/// True when the header contains the longitudinal time columns.
bool looks_longitudinal(std::string_view header_line, const TableSchema& schema = {});

std::vector<std::string> split_line(std::string_view line, char delimiter);
std::string format_double(double value);

}  // namespace clgbn
