#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "clgbn/averaging.hpp"
#include "clgbn/clg_model.hpp"
#include "clgbn/dataset.hpp"
#include "clgbn/graph.hpp"

namespace clgbn {

enum class Learner { kSingle, kAveraged };
/// kPerFold relearns the structure on every training split; kFixed learns it once on all rows
/// (or uses CvOptions::structure) and refits only the parameters per fold.
enum class StructureMode { kPerFold, kFixed };

std::string to_string(Learner learner);
std::string to_string(StructureMode mode);

struct CvOptions {
  std::size_t folds = 10;
  Learner learner = Learner::kAveraged;
  StructureMode mode = StructureMode::kPerFold;
  std::optional<Dag> structure;       // kFixed only
  std::size_t replicates = 50;
  std::optional<double> threshold;    // empty: estimated
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  SearchOptions search;
};

/// Seeded partition of n rows into k folds of size floor(n/k) or ceil(n/k). Entry r is row r's fold.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct VariableReport {
  std::string name;
  bool discrete = false;
  /// Continuous: pooled Pearson correlation of observed vs predicted (empty when undefined).
  /// Discrete: misclassification rate.
  std::optional<double> value;
  std::vector<std::optional<double>> per_fold;
  std::vector<double> predicted;  // one per row, in row order
};

struct FoldReport {
  std::size_t fold = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::vector<Arc> arcs;
  std::optional<double> threshold;  // averaged learner only
  std::size_t replicates = 0;       // successful bootstrap replicates
  std::vector<std::string> warnings;
};

struct CvReport {
  std::size_t k = 0;
  Learner learner = Learner::kAveraged;
  StructureMode mode = StructureMode::kPerFold;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of_row;
  std::vector<VariableReport> variables;  // data column order
  std::vector<FoldReport> folds;

  const VariableReport& variable(const std::string& name) const;
};

/// k-fold cross-validation of structure learning, parameter fitting and per-variable prediction
/// from all other variables. Errors are rethrown with the fold number prepended.
CvReport cross_validate(const Dataset& data, const ArcConstraints& constraints = {}, const CvOptions& options = {});

/// Flat summary: variable,type,metric,value.
void write_cv_summary(std::ostream& out, const CvReport& report, char delimiter = ',');

struct SubgroupResult {
  std::string level;
  std::size_t rows = 0;
  AveragedStructure structure;
};

/// Averaged consensus network per level of discrete column `by`, learned on that level's rows with
/// the column dropped and constraints mentioning it removed.
std::vector<SubgroupResult> subgroup_networks(const Dataset& data, const std::string& by,
                                              const ArcConstraints& constraints, const BootstrapOptions& options,
                                              std::optional<double> threshold = std::nullopt);

/// Constraints with every arc touching `node` removed.
ArcConstraints without_node(const ArcConstraints& constraints, const std::string& node);

}  // namespace clgbn
