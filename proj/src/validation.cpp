#include "clgbn/validation.hpp"

#include <algorithm>
#include <numeric>

#include "clgbn/corrnet.hpp"
#include "clgbn/error.hpp"
#include "clgbn/inference.hpp"
#include "clgbn/random.hpp"

namespace clgbn {

std::string to_string(Learner learner) { return learner == Learner::kSingle ? "single" : "averaged"; }
std::string to_string(StructureMode mode) { return mode == StructureMode::kPerFold ? "per_fold" : "fixed"; }

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || n < k) throw DataError("cross-validation needs n >= k >= 2 (n = " + std::to_string(n) +
                                      ", k = " + std::to_string(k) + ")");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto rng = substream(seed, 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[perm[i]] = i % k;
  return fold;
}

const VariableReport& CvReport::variable(const std::string& name) const {
  for (const auto& v : variables) {
    if (v.name == name) return v;
  }
  throw DataError("no cross-validation result for '" + name + "'");
}

namespace {

struct Learned {
  Dag dag;
  std::optional<double> threshold;
  std::size_t replicates = 0;
  std::vector<std::string> warnings;
};

Learned learn(const Dataset& data, const ArcConstraints& constraints, const CvOptions& options, std::uint64_t seed) {
  if (options.learner == Learner::kSingle) return {hill_climb(data, constraints, options.search).first, {}, 0, {}};
  BootstrapOptions boot{options.replicates, seed, 1, options.search};
  auto avg = average_structure(data, constraints, boot, options.threshold);
  return {avg.consensus.dag, avg.threshold, avg.bootstrap.dags.size(), avg.bootstrap.warnings};
}

std::uint64_t derived_seed(std::uint64_t seed, std::size_t index) { return substream(seed, index)(); }

template <typename F>
auto with_context(const std::string& context, F body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    throw NumericalError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const GraphError& e) {
    throw GraphError(context + ": " + e.what());
  }
}

std::optional<double> correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2) return std::nullopt;
  try {
    return pearson(a, b);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

CvReport cross_validate(const Dataset& data, const ArcConstraints& constraints, const CvOptions& options) {
  const std::size_t k = options.folds;
  const std::size_t n = data.rows();
  CvReport report;
  report.k = k;
  report.learner = options.learner;
  report.mode = options.mode;
  report.seed = options.seed;
  report.fold_of_row = assign_folds(n, k, options.seed);
  constraints.validate(data.names());

  std::optional<Learned> fixed;
  if (options.mode == StructureMode::kFixed) {
    if (options.structure) {
      fixed = Learned{*options.structure, {}, 0, {}};
    } else {
      fixed = with_context("full-data structure", [&] { return learn(data, constraints, options, derived_seed(options.seed, k + 1)); });
    }
  }

  std::vector<std::vector<std::size_t>> test(k), train(k);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t f = 0; f < k; ++f) (report.fold_of_row[r] == f ? test[f] : train[f]).push_back(r);
  }

  std::vector<std::vector<double>> predicted(data.cols(), std::vector<double>(n, 0.0));
  report.folds.resize(k);
  parallel_for(k, options.threads, [&](std::size_t f) {
    with_context("fold " + std::to_string(f + 1), [&] {
      const auto training = data.select_rows(train[f]);
      const auto learned = fixed ? *fixed : learn(training, constraints, options, derived_seed(options.seed, f + 1));
      const auto model = fit_parameters(learned.dag, training, options.search.fit);
      const auto map = column_mapping(model, data);
      std::vector<double> row(model.size());
      for (const auto r : test[f]) {
        for (std::size_t i = 0; i < model.size(); ++i) row[i] = data.at(r, map[i]);
        for (std::size_t i = 0; i < model.size(); ++i) predicted[map[i]][r] = predict_node(model, i, row);
      }
      auto& fr = report.folds[f];
      fr.fold = f;
      fr.train_rows = train[f].size();
      fr.test_rows = test[f].size();
      fr.arcs.assign(learned.dag.arcs().begin(), learned.dag.arcs().end());
      fr.threshold = learned.threshold;
      fr.replicates = learned.replicates;
      fr.warnings = learned.warnings;
      return 0;
    });
  });

  for (std::size_t c = 0; c < data.cols(); ++c) {
    VariableReport v;
    v.name = data.variable(c).name;
    v.discrete = data.variable(c).discrete();
    v.predicted = predicted[c];
    const auto observed = data.column(c);
    auto metric = [&](const std::vector<std::size_t>& rows) -> std::optional<double> {
      std::vector<double> obs, pred;
      for (const auto r : rows) {
        obs.push_back(observed[r]);
        pred.push_back(predicted[c][r]);
      }
      if (!v.discrete) return correlation(obs, pred);
      if (rows.empty()) return std::nullopt;
      std::size_t wrong = 0;
      for (std::size_t i = 0; i < obs.size(); ++i) wrong += obs[i] != pred[i];
      return static_cast<double>(wrong) / static_cast<double>(obs.size());
    };
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    v.value = metric(all);
    for (std::size_t f = 0; f < k; ++f) v.per_fold.push_back(metric(test[f]));
    report.variables.push_back(std::move(v));
  }
  return report;
}

void write_cv_summary(std::ostream& out, const CvReport& report, char delimiter) {
  out << "variable" << delimiter << "type" << delimiter << "metric" << delimiter << "value\n";
  for (const auto& v : report.variables) {
    out << v.name << delimiter << (v.discrete ? "discrete" : "continuous") << delimiter
        << (v.discrete ? "classification_error" : "predictive_correlation") << delimiter
        << (v.value ? format_double(*v.value) : "NA") << '\n';
  }
}

ArcConstraints without_node(const ArcConstraints& constraints, const std::string& node) {
  ArcConstraints out;
  for (const auto& a : constraints.whitelist) {
    if (a.from != node && a.to != node) out.whitelist.insert(a);
  }
  for (const auto& a : constraints.blacklist) {
    if (a.from != node && a.to != node) out.blacklist.insert(a);
  }
  return out;
}

std::vector<SubgroupResult> subgroup_networks(const Dataset& data, const std::string& by,
                                              const ArcConstraints& constraints, const BootstrapOptions& options,
                                              std::optional<double> threshold) {
  const auto c = data.index_of(by);
  const auto& var = data.variable(c);
  if (!var.discrete()) throw DataError("grouping column '" + by + "' must be discrete");
  const auto reduced = without_node(constraints, by);
  std::vector<SubgroupResult> out;
  for (std::size_t level = 0; level < var.levels.size(); ++level) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < data.rows(); ++r) {
      if (data.at(r, c) == static_cast<double>(level)) rows.push_back(r);
    }
    const auto& name = var.levels[level];
    if (rows.size() < 2) {
      throw DataError("subgroup " + by + "=" + name + " has " + std::to_string(rows.size()) + " rows; at least 2 needed");
    }
    const auto subset = data.select_rows(rows).drop_column(by);
    auto structure = with_context("subgroup " + by + "=" + name,
                                  [&] { return average_structure(subset, reduced, options, threshold); });
    out.push_back({name, rows.size(), std::move(structure)});
  }
  return out;
}

}  // namespace clgbn
