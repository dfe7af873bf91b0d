#include "clgbn/io.hpp"

#include <cmath>

#include "clgbn/error.hpp"

namespace clgbn {

Json number(double value) {
  if (std::isnan(value)) return nullptr;
  if (std::isinf(value)) return value > 0 ? "+inf" : "-inf";
  return value;
}

namespace {

Json arcs_json(const std::set<Arc>& arcs) {
  Json out = Json::array();
  for (const auto& a : arcs) out.push_back({{"from", a.from}, {"to", a.to}});
  return out;
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing field '") + key + "' in JSON");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

std::set<Arc> arcs_from_json(const Json& j) {
  std::set<Arc> arcs;
  if (!j.is_array()) throw DataError("arcs must be an array");
  for (const auto& a : j) arcs.insert({field<std::string>(a, "from"), field<std::string>(a, "to")});
  return arcs;
}

// Level names of a mixed-radix configuration, first parent slowest.
Json configuration_json(const ClgNetwork& model, const std::vector<std::string>& parents, std::size_t config) {
  std::vector<std::pair<std::string, std::string>> parts(parents.size());
  for (std::size_t j = parents.size(); j-- > 0;) {
    const auto& levels = model.variable(model.index_of(parents[j])).levels;
    parts[j] = {parents[j], levels[config % levels.size()]};
    config /= levels.size();
  }
  Json out = Json::object();
  for (const auto& [k, v] : parts) out[k] = v;
  return out;
}

}  // namespace

Json to_json(const Dag& dag) { return {{"nodes", dag.nodes()}, {"arcs", arcs_json(dag.arcs())}}; }

Dag dag_from_json(const Json& j) {
  return Dag(field<std::vector<std::string>>(j, "nodes"), arcs_from_json(j.contains("arcs") ? j.at("arcs") : Json::array()));
}

Json to_json(const ArcConstraints& c) {
  return {{"whitelist", arcs_json(c.whitelist)}, {"blacklist", arcs_json(c.blacklist)}};
}

Json to_json(const ClgNetwork& model) {
  Json vars = Json::array();
  for (const auto& v : model.variables()) {
    Json jv = {{"name", v.name}, {"type", v.discrete() ? "discrete" : "continuous"}};
    if (v.discrete()) jv["levels"] = v.levels;
    vars.push_back(std::move(jv));
  }
  Json locals = Json::array();
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& local = model.local(i);
    Json jl;
    if (const auto* g = std::get_if<LocalGaussian>(&local)) {
      jl = {{"node", g->node},
            {"kind", "gaussian"},
            {"coding", g->indicator_coding ? "indicator" : "per_configuration"},
            {"discrete_parents", g->discrete_parents},
            {"continuous_parents", g->continuous_parents},
            {"regressors", g->regressors}};
      Json blocks = Json::array();
      for (std::size_t b = 0; b < g->blocks.size(); ++b) {
        const auto& blk = g->blocks[b];
        Json coef = Json::object();
        for (std::size_t r = 0; r < blk.coefficients.size(); ++r) coef[g->regressors[r]] = number(blk.coefficients[r]);
        blocks.push_back({{"configuration", g->indicator_coding ? Json::object()
                                                                 : configuration_json(model, g->discrete_parents, b)},
                          {"intercept", number(blk.intercept)},
                          {"coefficients", coef},
                          {"sd", number(blk.sd)},
                          {"sd_unbiased", number(blk.sd_unbiased)},
                          {"n", blk.n},
                          {"degenerate", blk.degenerate},
                          {"inherited", blk.inherited}});
      }
      jl["blocks"] = std::move(blocks);
    } else {
      const auto& d = std::get<LocalDiscrete>(local);
      jl = {{"node", d.node},
            {"kind", "discrete"},
            {"levels", d.levels},
            {"discrete_parents", d.discrete_parents},
            {"continuous_parents", d.continuous_parents}};
      Json blocks = Json::array();
      for (std::size_t b = 0; b < d.blocks.size(); ++b) {
        const auto& blk = d.blocks[b];
        Json jb = {{"configuration", configuration_json(model, d.discrete_parents, b)}};
        if (d.continuous_parents.empty()) {
          jb["probabilities"] = blk.probabilities;
        } else {
          jb["logits"] = blk.logits;
        }
        jb["n"] = blk.n;
        jb["inherited"] = blk.inherited;
        blocks.push_back(std::move(jb));
      }
      jl["blocks"] = std::move(blocks);
    }
    locals.push_back(std::move(jl));
  }
  return {{"format", "clgbn-model"},
          {"version", 1},
          {"fitted_n", model.fitted_n()},
          {"variables", vars},
          {"dag", to_json(model.dag())},
          {"locals", locals},
          {"warnings", model.warnings}};
}

ClgNetwork model_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", "") != "clgbn-model") throw DataError("not a clgbn model file");
  std::vector<Variable> vars;
  for (const auto& jv : field<Json>(j, "variables")) {
    Variable v;
    v.name = field<std::string>(jv, "name");
    const auto type = field<std::string>(jv, "type");
    if (type == "discrete") {
      v.type = VarType::kDiscrete;
      v.levels = field<std::vector<std::string>>(jv, "levels");
    } else if (type != "continuous") {
      throw DataError("unknown variable type '" + type + "'");
    }
    vars.push_back(std::move(v));
  }
  std::vector<LocalDistribution> locals;
  for (const auto& jl : field<Json>(j, "locals")) {
    const auto kind = field<std::string>(jl, "kind");
    if (kind == "gaussian") {
      LocalGaussian g;
      g.node = field<std::string>(jl, "node");
      g.indicator_coding = field<std::string>(jl, "coding") == "indicator";
      g.discrete_parents = field<std::vector<std::string>>(jl, "discrete_parents");
      g.continuous_parents = field<std::vector<std::string>>(jl, "continuous_parents");
      g.regressors = field<std::vector<std::string>>(jl, "regressors");
      for (const auto& jb : field<Json>(jl, "blocks")) {
        GaussianBlock b;
        b.intercept = field<double>(jb, "intercept");
        const auto coef = field<Json>(jb, "coefficients");
        for (const auto& name : g.regressors) {
          if (!coef.contains(name)) throw DataError("block of '" + g.node + "' lacks coefficient '" + name + "'");
          b.coefficients.push_back(field<double>(coef, name.c_str()));
        }
        if (coef.size() != g.regressors.size()) throw DataError("block of '" + g.node + "' has extra coefficients");
        b.sd = field<double>(jb, "sd");
        b.sd_unbiased = field<double>(jb, "sd_unbiased");
        b.n = field<std::size_t>(jb, "n");
        b.degenerate = field<bool>(jb, "degenerate");
        b.inherited = field<bool>(jb, "inherited");
        g.blocks.push_back(std::move(b));
      }
      locals.emplace_back(std::move(g));
    } else if (kind == "discrete") {
      LocalDiscrete d;
      d.node = field<std::string>(jl, "node");
      d.levels = field<std::vector<std::string>>(jl, "levels");
      d.discrete_parents = field<std::vector<std::string>>(jl, "discrete_parents");
      d.continuous_parents = field<std::vector<std::string>>(jl, "continuous_parents");
      for (const auto& jb : field<Json>(jl, "blocks")) {
        DiscreteBlock b;
        if (d.continuous_parents.empty()) {
          b.probabilities = field<std::vector<double>>(jb, "probabilities");
        } else {
          b.logits = field<std::vector<std::vector<double>>>(jb, "logits");
        }
        b.n = field<std::size_t>(jb, "n");
        b.inherited = field<bool>(jb, "inherited");
        d.blocks.push_back(std::move(b));
      }
      locals.emplace_back(std::move(d));
    } else {
      throw DataError("unknown local distribution kind '" + kind + "'");
    }
  }
  ClgNetwork model(dag_from_json(field<Json>(j, "dag")), std::move(vars), std::move(locals),
                   j.value("fitted_n", std::size_t{0}));
  if (j.contains("warnings")) model.warnings = field<std::vector<std::string>>(j, "warnings");
  return model;
}

Json to_json(const ArcStrengthTable& table) {
  Json pairs = Json::array();
  for (const auto& p : table.pairs()) {
    pairs.push_back({{"a", p.a}, {"b", p.b}, {"strength", p.strength}, {"direction_a_to_b", p.forward}, {"direction_b_to_a", p.backward}});
  }
  return {{"nodes", table.nodes()}, {"replicates", table.replicates()}, {"pairs", pairs}};
}

Json to_json(const AveragedStructure& avg, const ArcConstraints& constraints) {
  Json arcs = Json::array();
  for (const auto& a : avg.consensus.dag.arcs()) {
    arcs.push_back({{"from", a.from},
                    {"to", a.to},
                    {"strength", avg.strengths.strength(a.from, a.to)},
                    {"direction", avg.strengths.direction(a.from, a.to)},
                    {"whitelisted", constraints.requires_arc(a)}});
  }
  Json dropped = Json::array();
  for (const auto& a : avg.consensus.dropped) dropped.push_back({{"from", a.from}, {"to", a.to}});
  return {{"nodes", avg.consensus.dag.nodes()},
          {"arcs", arcs},
          {"threshold", avg.threshold},
          {"threshold_method", avg.estimated ? "l1-step-cdf" : "fixed"},
          {"replicates_requested", avg.bootstrap.requested},
          {"replicates_used", avg.bootstrap.dags.size()},
          {"cycle_repair_dropped", dropped},
          {"warnings", avg.bootstrap.warnings}};
}

Json to_json(const QueryResult& r) {
  return {{"kind", r.kind},
          {"estimate", r.estimate ? number(*r.estimate) : Json(nullptr)},
          {"standard_error", r.standard_error ? number(*r.standard_error) : Json(nullptr)},
          {"no_matches", r.evidence_matches == 0},
          {"samples", r.samples},
          {"evidence_matches", r.evidence_matches},
          {"event_matches", r.event_matches}};
}

Json to_json(const CvReport& report) {
  auto opt = [](const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); };
  Json vars = Json::array();
  for (const auto& v : report.variables) {
    Json per = Json::array();
    for (const auto& p : v.per_fold) per.push_back(opt(p));
    vars.push_back({{"name", v.name},
                    {"type", v.discrete ? "discrete" : "continuous"},
                    {"metric", v.discrete ? "classification_error" : "predictive_correlation"},
                    {"value", opt(v.value)},
                    {"per_fold", per}});
  }
  Json folds = Json::array();
  for (const auto& f : report.folds) {
    Json arcs = Json::array();
    for (const auto& a : f.arcs) arcs.push_back({{"from", a.from}, {"to", a.to}});
    folds.push_back({{"fold", f.fold + 1},
                     {"train_rows", f.train_rows},
                     {"test_rows", f.test_rows},
                     {"arcs", arcs},
                     {"threshold", opt(f.threshold)},
                     {"replicates_used", f.replicates},
                     {"warnings", f.warnings}});
  }
  Json assignment = Json::array();
  for (const auto f : report.fold_of_row) assignment.push_back(f + 1);
  return {{"k", report.k},
          {"learner", to_string(report.learner)},
          {"structure", to_string(report.mode)},
          {"seed", report.seed},
          {"variables", vars},
          {"folds", folds},
          {"fold_of_row", assignment}};
}

Json to_json(const CorrelationNetwork& net) {
  Json edges = Json::array();
  for (const auto& e : net.graph.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"r", number(e.r)}});
  Json matrix = Json::array();
  for (const auto& row : net.matrix.values) {
    Json r = Json::array();
    for (const double v : row) r.push_back(number(v));
    matrix.push_back(std::move(r));
  }
  return {{"threshold", net.threshold}, {"labels", net.matrix.labels}, {"matrix", matrix}, {"edges", edges}};
}

void write_trace(std::ostream& out, const SearchTrace& trace) {
  out << Json{{"step", 0}, {"score", number(trace.initial_score)}}.dump() << '\n';
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out << Json{{"step", i + 1},
                {"move", to_string(s.move.kind)},
                {"from", s.move.arc.from},
                {"to", s.move.arc.to},
                {"delta", number(s.move.delta)},
                {"score", number(s.score)}}
               .dump()
        << '\n';
  }
}

}  // namespace clgbn
