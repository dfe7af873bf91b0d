#include "clgbn/cli.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "clgbn/averaging.hpp"
#include "clgbn/corrnet.hpp"
#include "clgbn/dataset.hpp"
#include "clgbn/error.hpp"
#include "clgbn/inference.hpp"
#include "clgbn/io.hpp"
#include "clgbn/search.hpp"
#include "clgbn/validation.hpp"

namespace clgbn::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string command;
  std::string input;
  std::string atlas;
  std::string coding = "binary";
  std::string delimiter = ",";
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;

  std::string constraints = "auto";
  std::string whitelist;
  std::string blacklist;
  bool no_reversals = false;
  bool indicator_parents = false;

  std::size_t replicates = 200;
  std::string threshold = "auto";
  std::optional<double> simplify;
  double corr_threshold = 0.4;

  std::string model;
  std::string dag;
  std::size_t samples = 10000;
  std::vector<std::string> evidence;
  std::vector<std::string> event;
  std::string expect;
  double epsilon = 0.5;
  std::string node;
  std::string value;
  std::size_t n = 100;

  std::size_t k = 10;
  std::string learner = "averaged";
  std::string structure = "per_fold";
  std::string by = "Treatment";
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw UsageError(what + ": '" + text + "' is not a number");
  }
  return v;
}

char delimiter_of(const Options& o) {
  if (o.delimiter == "tab" || o.delimiter == "\\t") return '\t';
  if (o.delimiter.size() != 1) throw UsageError("--delimiter must be a single character or 'tab'");
  return o.delimiter[0];
}

TreatmentCoding coding_of(const Options& o) {
  if (o.coding == "binary") return TreatmentCoding::kBinary;
  if (o.coding == "three-level") return TreatmentCoding::kThreeLevel;
  throw UsageError("--coding must be 'binary' or 'three-level'");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + (dir_ / name).string() + "'");
    out << content;
  }
  void write(const std::string& name, const Json& j) const { write(name, j.dump(2) + "\n"); }

 private:
  fs::path dir_;
};

TableSchema schema_of(const Options& o) {
  TableSchema s;
  s.delimiter = delimiter_of(o);
  return s;
}

LongitudinalTable load_longitudinal(const Options& o) {
  std::istringstream in(slurp(o.input));
  auto table = load_table(in, schema_of(o));
  if (!o.atlas.empty()) {
    std::istringstream atlas(slurp(o.atlas));
    table = adjust_with_atlas(table, load_atlas(atlas, delimiter_of(o)));
  }
  return table;
}

Dataset load_data(const Options& o) {
  if (o.input.empty()) throw UsageError("--input is required");
  const auto text = slurp(o.input);
  const auto header = text.substr(0, text.find('\n'));
  if (looks_longitudinal(header, schema_of(o))) return compute_deltas(load_longitudinal(o), coding_of(o));
  if (!o.atlas.empty()) throw DataError("--atlas needs the longitudinal table (columns t1 and t2)");
  std::istringstream in(text);
  return read_dataset(in, delimiter_of(o), canonical_level_order(coding_of(o)));
}

std::set<Arc> parse_arcs(const std::string& text) {
  std::set<Arc> arcs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    const auto pos = item.find("->");
    if (pos == std::string::npos) throw UsageError("arc '" + item + "' must be written FROM->TO");
    arcs.insert({trim(item.substr(0, pos)), trim(item.substr(pos + 2))});
  }
  return arcs;
}

ArcConstraints constraints_of(const Options& o, const std::vector<std::string>& nodes) {
  ArcConstraints extra{parse_arcs(o.whitelist), parse_arcs(o.blacklist)};
  if (o.constraints == "none") {
    extra.validate(nodes);
    return extra;
  }
  ConstraintRoles roles;
  if (o.constraints == "default") return default_constraints(nodes, roles, extra);
  if (o.constraints != "auto") throw UsageError("--constraints must be auto, default or none");
  auto has = [&](const std::string& n) { return std::find(nodes.begin(), nodes.end(), n) != nodes.end(); };
  if (!has(roles.time) || !has(roles.growth)) {
    extra.validate(nodes);
    return extra;
  }
  std::erase_if(roles.feature_whitelist, [&](const Arc& a) { return !has(a.from) || !has(a.to); });
  return default_constraints(nodes, roles, extra);
}

SearchOptions search_of(const Options& o) {
  SearchOptions s;
  s.allow_reversals = !o.no_reversals;
  s.fit.coding = o.indicator_parents ? DiscreteParentCoding::kIndicator : DiscreteParentCoding::kPerConfiguration;
  return s;
}

std::optional<double> threshold_of(const Options& o) {
  if (o.threshold == "auto") return std::nullopt;
  const double t = to_number(o.threshold, "--threshold");
  if (t < 0.0) throw UsageError("--threshold must be 'auto' or a non-negative number");
  return t;
}

// Splits on commas outside brackets.
std::vector<std::string> split_terms(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (const char c : text) {
    if (c == '[' || c == '(') ++depth;
    if (c == ']' || c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Evidence parse_evidence(const std::vector<std::string>& texts, const ClgNetwork& model, double epsilon) {
  Evidence ev;
  for (const auto& text : texts) {
    for (const auto& raw : split_terms(text)) {
      const auto term = trim(raw);
      if (term.empty()) continue;
      if (const auto pos = term.find(" in "); pos != std::string::npos) {
        const auto name = trim(term.substr(0, pos));
        auto range = trim(term.substr(pos + 4));
        if (range.size() < 5 || range.front() != '[' || range.back() != ']') {
          throw UsageError("interval in '" + term + "' must look like [lo,hi]");
        }
        const auto inner = range.substr(1, range.size() - 2);
        const auto comma = inner.find(',');
        if (comma == std::string::npos) throw UsageError("interval in '" + term + "' must look like [lo,hi]");
        ev.push_back(Condition::between(name, to_number(inner.substr(0, comma), term),
                                        to_number(inner.substr(comma + 1), term)));
        continue;
      }
      if (const auto pos = term.find('~'); pos != std::string::npos) {
        ev.push_back(Condition::near(trim(term.substr(0, pos)), to_number(term.substr(pos + 1), term), epsilon));
        continue;
      }
      const auto pos = term.find('=');
      if (pos == std::string::npos) throw UsageError("cannot parse condition '" + term + "'");
      const auto name = trim(term.substr(0, pos));
      const auto value = trim(term.substr(pos + 1));
      const auto i = model.index_of(name);
      if (model.variable(i).discrete()) ev.push_back(Condition::equals(name, value));
      else ev.push_back(Condition::near(name, to_number(value, term), epsilon));
    }
  }
  validate_evidence(model, ev);
  return ev;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (const char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  return out;
}

Json config_json(const Options& o) {
  auto opt_num = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return {{"command", o.command},
          {"input", o.input},
          {"atlas", o.atlas},
          {"coding", o.coding},
          {"delimiter", o.delimiter},
          {"out", o.out},
          {"seed", *o.seed},
          {"threads", o.threads},
          {"constraints", o.constraints},
          {"whitelist", o.whitelist},
          {"blacklist", o.blacklist},
          {"reversals", !o.no_reversals},
          {"indicator_parents", o.indicator_parents},
          {"B", o.replicates},
          {"threshold", o.threshold},
          {"simplify", opt_num(o.simplify)},
          {"corr_threshold", o.corr_threshold},
          {"model", o.model},
          {"dag", o.dag},
          {"samples", o.samples},
          {"evidence", o.evidence},
          {"event", o.event},
          {"expect", o.expect},
          {"epsilon", o.epsilon},
          {"node", o.node},
          {"value", o.value},
          {"n", o.n},
          {"k", o.k},
          {"learner", o.learner},
          {"structure", o.structure},
          {"by", o.by}};
}

Options options_from_json(const Json& j) {
  Options o;
  try {
    o.command = j.at("command").get<std::string>();
    o.input = j.value("input", o.input);
    o.atlas = j.value("atlas", o.atlas);
    o.coding = j.value("coding", o.coding);
    o.delimiter = j.value("delimiter", o.delimiter);
    o.out = j.value("out", o.out);
    o.seed = j.at("seed").get<std::uint64_t>();
    o.threads = j.value("threads", o.threads);
    o.constraints = j.value("constraints", o.constraints);
    o.whitelist = j.value("whitelist", o.whitelist);
    o.blacklist = j.value("blacklist", o.blacklist);
    o.no_reversals = !j.value("reversals", true);
    o.indicator_parents = j.value("indicator_parents", o.indicator_parents);
    o.replicates = j.value("B", o.replicates);
    o.threshold = j.value("threshold", o.threshold);
    if (j.contains("simplify") && !j["simplify"].is_null()) o.simplify = j["simplify"].get<double>();
    o.corr_threshold = j.value("corr_threshold", o.corr_threshold);
    o.model = j.value("model", o.model);
    o.dag = j.value("dag", o.dag);
    o.samples = j.value("samples", o.samples);
    o.evidence = j.value("evidence", o.evidence);
    o.event = j.value("event", o.event);
    o.expect = j.value("expect", o.expect);
    o.epsilon = j.value("epsilon", o.epsilon);
    o.node = j.value("node", o.node);
    o.value = j.value("value", o.value);
    o.n = j.value("n", o.n);
    o.k = j.value("k", o.k);
    o.learner = j.value("learner", o.learner);
    o.structure = j.value("structure", o.structure);
    o.by = j.value("by", o.by);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed run config: ") + e.what());
  }
  if (o.command == "rerun") throw DataError("a run config cannot name 'rerun'");
  return o;
}

ClgNetwork load_model(const Options& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  Json j;
  try {
    j = Json::parse(slurp(o.model));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("model file '" + o.model + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------- subcommands

void cmd_corrnet(const Options& o, const Output& out) {
  const auto data = load_data(o);
  const auto net = correlation_network(data, o.corr_threshold);
  out.write("corrnet.csv", matrix_to_text(net.matrix, delimiter_of(o)));
  out.write("corrnet.dot", network_to_dot(net));
  out.write("corrnet.json", to_json(net));
  std::cout << net.graph.edges.size() << " edges with |r| > " << format_double(o.corr_threshold) << "\n";
}

void write_model(const Output& out, const std::string& name, const ClgNetwork& model) {
  out.write(name, to_json(model));
  for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
}

void cmd_learn(const Options& o, const Output& out) {
  const auto data = load_data(o);
  const auto c = constraints_of(o, data.names());
  const auto search = search_of(o);
  const auto [dag, trace] = hill_climb(data, c, search);
  auto j = to_json(dag);
  j["score"] = number(trace.final_score);
  j["iterations"] = trace.iterations;
  out.write("dag.json", j);
  out.write("dag.dot", to_dot(dag, nullptr, &c.whitelist));
  out.write("constraints.json", to_json(c));
  std::ostringstream tr;
  write_trace(tr, trace);
  out.write("trace.jsonl", tr.str());
  write_model(out, "model.json", fit_parameters(dag, data, search.fit));
  std::cout << dag.arcs().size() << " arcs, BIC " << format_double(trace.final_score) << "\n";
}

void write_consensus(const Output& out, const std::string& stem, const AveragedStructure& avg,
                     const ArcConstraints& c) {
  out.write(stem + ".json", to_json(avg, c));
  const auto strengths = arc_strength_map(avg.strengths, avg.consensus.dag);
  out.write(stem + ".dot", to_dot(avg.consensus.dag, &strengths, &c.whitelist));
}

void cmd_average(const Options& o, const Output& out) {
  const auto data = load_data(o);
  const auto c = constraints_of(o, data.names());
  const auto search = search_of(o);
  BootstrapOptions boot{o.replicates, *o.seed, o.threads, search};
  const auto avg = average_structure(data, c, boot, threshold_of(o));
  for (const auto& w : avg.bootstrap.warnings) std::cerr << "warning: " << w << "\n";
  std::ostringstream csv;
  write_strengths(csv, avg.strengths, delimiter_of(o));
  out.write("strengths.csv", csv.str());
  out.write("strengths.json", to_json(avg.strengths));
  out.write("constraints.json", to_json(c));
  write_consensus(out, "consensus", avg, c);
  write_model(out, "model.json", fit_parameters(avg.consensus.dag, data, search.fit));
  std::cout << "threshold " << format_double(avg.threshold) << ", " << avg.consensus.dag.arcs().size()
            << " arcs in the consensus\n";
  if (o.simplify) {
    auto simple = avg;
    simple.threshold = *o.simplify;
    simple.estimated = false;
    simple.consensus = consensus(avg.strengths, *o.simplify, c);
    write_consensus(out, "consensus_simplified", simple, c);
    std::cout << simple.consensus.dag.arcs().size() << " arcs at threshold " << format_double(*o.simplify) << "\n";
  }
}

void cmd_fit(const Options& o, const Output& out) {
  const auto data = load_data(o);
  if (o.dag.empty()) throw UsageError("--dag is required");
  Json j;
  try {
    j = Json::parse(slurp(o.dag));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("DAG file '" + o.dag + "' is not valid JSON: " + e.what());
  }
  const auto dag = dag_from_json(j);
  write_model(out, "model.json", fit_parameters(dag, data, search_of(o).fit));
}

void run_query(const Options& o, const Output& out, const ClgNetwork& model) {
  const auto evidence = parse_evidence(o.evidence, model, o.epsilon);
  SamplingOptions so{o.samples, *o.seed, o.threads};
  QueryResult r;
  if (!o.expect.empty()) {
    r = expectation(model, o.expect, evidence, so);
  } else {
    if (o.event.empty()) throw UsageError("--event or --expect is required");
    r = query(model, parse_evidence(o.event, model, o.epsilon), evidence, so);
  }
  auto j = to_json(r);
  j["evidence"] = o.evidence;
  j["event"] = o.event;
  j["expect"] = o.expect;
  j["epsilon"] = o.epsilon;
  out.write("query.json", j);
  std::cout << j.dump() << "\n";
}

void cmd_query(const Options& o, const Output& out) { run_query(o, out, load_model(o)); }

void cmd_intervene(const Options& o, const Output& out) {
  const auto model = load_model(o);
  if (o.node.empty() || o.value.empty()) throw UsageError("--node and --value are required");
  const auto mutilated = intervene(model, o.node, o.value);
  write_model(out, "intervened_model.json", mutilated);
  if (!o.event.empty() || !o.expect.empty()) run_query(o, out, mutilated);
}

void cmd_cv(const Options& o, const Output& out) {
  const auto data = load_data(o);
  const auto c = constraints_of(o, data.names());
  CvOptions cv;
  cv.folds = o.k;
  if (o.learner == "single") cv.learner = Learner::kSingle;
  else if (o.learner != "averaged") throw UsageError("--learner must be 'single' or 'averaged'");
  if (o.structure == "fixed") cv.mode = StructureMode::kFixed;
  else if (o.structure != "per_fold") throw UsageError("--structure must be 'per_fold' or 'fixed'");
  if (!o.dag.empty()) {
    if (cv.mode != StructureMode::kFixed) throw UsageError("--dag needs --structure fixed");
    cv.structure = dag_from_json(Json::parse(slurp(o.dag)));
  }
  cv.replicates = o.replicates;
  cv.threshold = threshold_of(o);
  cv.seed = *o.seed;
  cv.threads = o.threads;
  cv.search = search_of(o);
  const auto report = cross_validate(data, c, cv);
  out.write("cv.json", to_json(report));
  std::ostringstream csv;
  write_cv_summary(csv, report, delimiter_of(o));
  out.write("cv.csv", csv.str());
  std::cout << csv.str();
}

void cmd_subgroups(const Options& o, const Output& out) {
  const auto data = load_data(o);
  const auto c = constraints_of(o, data.names());
  BootstrapOptions boot{o.replicates, *o.seed, o.threads, search_of(o)};
  const auto groups = subgroup_networks(data, o.by, c, boot, threshold_of(o));
  const auto reduced = without_node(c, o.by);
  Json summary = Json::array();
  for (const auto& g : groups) {
    const auto stem = "subgroup_" + safe_name(o.by) + "_" + safe_name(g.level);
    write_consensus(out, stem, g.structure, reduced);
    summary.push_back({{"level", g.level},
                       {"rows", g.rows},
                       {"file", stem + ".json"},
                       {"threshold", g.structure.threshold},
                       {"arcs", g.structure.consensus.dag.arcs().size()}});
    std::cout << o.by << "=" << g.level << ": " << g.rows << " rows, " << g.structure.consensus.dag.arcs().size()
              << " arcs\n";
  }
  out.write("subgroups.json", Json{{"by", o.by}, {"groups", summary}});
}

void cmd_adjust(const Options& o, const Output& out) {
  if (o.input.empty()) throw UsageError("--input is required");
  if (o.atlas.empty()) throw UsageError("--atlas is required");
  const auto table = load_longitudinal(o);
  std::ostringstream adjusted;
  write_table(adjusted, table, schema_of(o));
  out.write("adjusted.csv", adjusted.str());
  std::ostringstream deltas;
  write_dataset(deltas, compute_deltas(table, coding_of(o)), delimiter_of(o));
  out.write("deltas.csv", deltas.str());
}

void cmd_simulate(const Options& o, const Output& out) {
  const auto model = load_model(o);
  std::ostringstream csv;
  write_dataset(csv, simulate(model, o.n, *o.seed, o.threads), delimiter_of(o));
  out.write("simulated.csv", csv.str());
}

// ---------------------------------------------------------------- argument wiring

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "Master random seed (random and logged when absent)");
  sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores")->capture_default_str();
  sub->add_option("--delimiter", o.delimiter, "Field delimiter of delimited files ('tab' for tabs)")
      ->capture_default_str();
}

void add_data(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "Longitudinal table (id,t1,t2,...) or modeling table")->required();
  sub->add_option("--atlas", o.atlas, "Reference atlas (feature,age,value) for growth adjustment");
  sub->add_option("--coding", o.coding, "Treatment coding: binary or three-level")->capture_default_str();
}

void add_search(CLI::App* sub, Options& o) {
  sub->add_option("--constraints", o.constraints, "auto, default or none")->capture_default_str();
  sub->add_option("--whitelist", o.whitelist, "Extra required arcs, e.g. 'A->B,C->D'");
  sub->add_option("--blacklist", o.blacklist, "Extra forbidden arcs");
  sub->add_flag("--no-reversals", o.no_reversals, "Disable arc reversal moves");
  sub->add_flag("--indicator-parents", o.indicator_parents,
                "Code discrete parents of continuous nodes as indicator regressors with a shared sd");
}

void add_query(CLI::App* sub, Options& o) {
  sub->add_option("--samples", o.samples, "Logic-sampling draws")->capture_default_str();
  sub->add_option("--evidence", o.evidence, "Conditions, e.g. 'Treatment=treated,dT in [5,7],dANB~0'");
  sub->add_option("--event", o.event, "Event conditions (same syntax)");
  sub->add_option("--expect", o.expect, "Continuous variable whose conditional mean is estimated");
  sub->add_option("--epsilon", o.epsilon, "Half-width of '~v' and '=v' conditions on continuous variables")
      ->capture_default_str();
}

int dispatch(const Options& o) {
  const Output out(o.out);
  out.write("config.json", config_json(o));
  if (o.command == "corrnet") cmd_corrnet(o, out);
  else if (o.command == "learn") cmd_learn(o, out);
  else if (o.command == "average") cmd_average(o, out);
  else if (o.command == "fit") cmd_fit(o, out);
  else if (o.command == "query") cmd_query(o, out);
  else if (o.command == "intervene") cmd_intervene(o, out);
  else if (o.command == "cv") cmd_cv(o, out);
  else if (o.command == "subgroups") cmd_subgroups(o, out);
  else if (o.command == "adjust") cmd_adjust(o, out);
  else if (o.command == "simulate") cmd_simulate(o, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Conditional linear-Gaussian Bayesian networks for longitudinal growth data"};
  app.name("clgbn");
  app.require_subcommand(1);
  Options o;

  auto* corrnet = app.add_subcommand("corrnet", "Pairwise correlation network");
  add_data(corrnet, o);
  corrnet->add_option("--corr-threshold", o.corr_threshold, "Keep edges with |r| above this")->capture_default_str();

  auto* learn = app.add_subcommand("learn", "Single hill-climbing structure search");
  add_data(learn, o);
  add_search(learn, o);

  auto* average = app.add_subcommand("average", "Bootstrap model averaging and consensus network");
  add_data(average, o);
  add_search(average, o);
  average->add_option("--B", o.replicates, "Bootstrap replicates")->capture_default_str();
  average->add_option("--threshold", o.threshold, "Consensus threshold: auto or a number")->capture_default_str();
  average->add_option("--simplify", o.simplify, "Also write a consensus at this stricter threshold");

  auto* fit = app.add_subcommand("fit", "Fit parameters for a given DAG");
  add_data(fit, o);
  fit->add_option("--dag", o.dag, "DAG JSON (nodes, arcs)")->required();
  fit->add_flag("--indicator-parents", o.indicator_parents, "Indicator coding of discrete parents");

  auto* q = app.add_subcommand("query", "Logic-sampling conditional query");
  q->add_option("--model", o.model, "Fitted model JSON")->required();
  add_query(q, o);

  auto* iv = app.add_subcommand("intervene", "Fix a node (do-operator), optionally query the result");
  iv->add_option("--model", o.model, "Fitted model JSON")->required();
  iv->add_option("--node", o.node, "Node to fix")->required();
  iv->add_option("--value", o.value, "Level or number")->required();
  add_query(iv, o);

  std::size_t cv_replicates = 50;
  auto* cv = app.add_subcommand("cv", "k-fold cross-validation");
  add_data(cv, o);
  add_search(cv, o);
  cv->add_option("--k", o.k, "Folds")->capture_default_str();
  cv->add_option("--learner", o.learner, "averaged or single")->capture_default_str();
  cv->add_option("--structure", o.structure, "per_fold or fixed")->capture_default_str();
  cv->add_option("--dag", o.dag, "Fixed structure (with --structure fixed)");
  cv->add_option("--B", cv_replicates, "Bootstrap replicates per fold")->capture_default_str();
  cv->add_option("--threshold", o.threshold, "Consensus threshold: auto or a number")->capture_default_str();

  auto* sg = app.add_subcommand("subgroups", "Separate consensus networks per level of a discrete column");
  add_data(sg, o);
  add_search(sg, o);
  sg->add_option("--by", o.by, "Grouping column")->capture_default_str();
  sg->add_option("--B", o.replicates, "Bootstrap replicates")->capture_default_str();
  sg->add_option("--threshold", o.threshold, "Consensus threshold: auto or a number")->capture_default_str();

  auto* adjust = app.add_subcommand("adjust", "Subtract reference growth from a longitudinal table");
  add_data(adjust, o);

  auto* sim = app.add_subcommand("simulate", "Sample rows from a fitted model");
  sim->add_option("--model", o.model, "Fitted model JSON")->required();
  sim->add_option("-n", o.n, "Rows")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) add_common(sub, o);

  std::string config_path;
  std::optional<std::string> rerun_out;
  auto* rerun = app.add_subcommand("rerun", "Repeat a run from its saved config.json");
  rerun->add_option("--config", config_path, "config.json written by an earlier run")->required();
  rerun->add_option("--out", rerun_out, "Output directory (default: the one recorded in the config)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  o.command = app.get_subcommands().front()->get_name();
  if (o.command == "cv") o.replicates = cv_replicates;

  try {
    if (o.command == "rerun") {
      Json j;
      try {
        j = Json::parse(slurp(config_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw DataError("run config '" + config_path + "' is not valid JSON: " + e.what());
      }
      o = options_from_json(j);
      if (rerun_out) o.out = *rerun_out;
    }
    if (!o.seed) {
      std::random_device rd;
      o.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
      std::cerr << "seed: " << *o.seed << "\n";
    }
    return dispatch(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.get_subcommands().front()->help();
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace clgbn::cli
