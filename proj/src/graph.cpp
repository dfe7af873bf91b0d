#include "clgbn/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>
#include <sstream>

#include "clgbn/error.hpp"

namespace clgbn {

std::string to_string(const Arc& arc) { return arc.from + " -> " + arc.to; }

namespace {

std::map<std::string, std::size_t> index_nodes(const std::vector<std::string>& nodes) {
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!idx.emplace(nodes[i], i).second) throw GraphError("duplicate node '" + nodes[i] + "'");
  }
  return idx;
}

}  // namespace

std::optional<std::vector<std::string>> topological_sort(const std::vector<std::string>& nodes,
                                                         const std::set<Arc>& arcs) {
  const auto idx = index_nodes(nodes);
  std::vector<std::vector<std::size_t>> out(nodes.size());
  std::vector<std::size_t> indeg(nodes.size(), 0);
  for (const auto& a : arcs) {
    const auto f = idx.find(a.from);
    const auto t = idx.find(a.to);
    if (f == idx.end() || t == idx.end()) throw GraphError("arc over unknown node: " + to_string(a));
    out[f->second].push_back(t->second);
    ++indeg[t->second];
  }
  // Smallest declaration index first, for a deterministic order.
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (indeg[i] == 0) ready.insert(i);
  }
  std::vector<std::string> order;
  order.reserve(nodes.size());
  while (!ready.empty()) {
    const auto i = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(nodes[i]);
    for (const auto j : out[i]) {
      if (--indeg[j] == 0) ready.insert(j);
    }
  }
  if (order.size() != nodes.size()) return std::nullopt;
  return order;
}

bool is_acyclic(const std::vector<std::string>& nodes, const std::set<Arc>& arcs) {
  return topological_sort(nodes, arcs).has_value();
}

std::optional<std::vector<Arc>> find_cycle(const std::vector<std::string>& nodes, const std::set<Arc>& arcs) {
  const auto idx = index_nodes(nodes);
  std::vector<std::vector<std::size_t>> out(nodes.size());
  for (const auto& a : arcs) out[idx.at(a.from)].push_back(idx.at(a.to));
  for (auto& o : out) std::sort(o.begin(), o.end());

  enum class Mark { kWhite, kGrey, kBlack };
  std::vector<Mark> mark(nodes.size(), Mark::kWhite);
  std::vector<std::size_t> stack;
  std::optional<std::vector<Arc>> cycle;

  std::function<bool(std::size_t)> visit = [&](std::size_t u) {
    mark[u] = Mark::kGrey;
    stack.push_back(u);
    for (const auto v : out[u]) {
      if (mark[v] == Mark::kGrey) {
        const auto start = std::find(stack.begin(), stack.end(), v);
        std::vector<Arc> c;
        for (auto it = start; it != stack.end(); ++it) {
          const auto next = (it + 1 == stack.end()) ? v : *(it + 1);
          c.push_back({nodes[*it], nodes[next]});
        }
        cycle = std::move(c);
        return true;
      }
      if (mark[v] == Mark::kWhite && visit(v)) return true;
    }
    stack.pop_back();
    mark[u] = Mark::kBlack;
    return false;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (mark[i] == Mark::kWhite && visit(i)) break;
  }
  return cycle;
}

// ---------------------------------------------------------------- Dag

Dag::Dag(std::vector<std::string> nodes, std::set<Arc> arcs) : nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  for (const auto& a : arcs_) {
    if (a.from == a.to) throw GraphError("self-arc on '" + a.from + "'");
  }
  if (!topological_sort(nodes_, arcs_)) throw GraphError("graph contains a cycle");
}

bool Dag::has_node(std::string_view name) const {
  return std::find(nodes_.begin(), nodes_.end(), name) != nodes_.end();
}

std::vector<std::string> Dag::parents(std::string_view node) const {
  std::vector<std::string> out;
  for (const auto& a : arcs_) {
    if (a.to == node) out.push_back(a.from);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Dag::children(std::string_view node) const {
  std::vector<std::string> out;
  for (const auto& a : arcs_) {
    if (a.from == node) out.push_back(a.to);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Dag::topological_order() const { return *topological_sort(nodes_, arcs_); }

Dag Dag::with_arc(const Arc& arc) const {
  auto arcs = arcs_;
  arcs.insert(arc);
  return Dag(nodes_, std::move(arcs));
}

Dag Dag::without_arc(const Arc& arc) const {
  auto arcs = arcs_;
  arcs.erase(arc);
  return Dag(nodes_, std::move(arcs));
}

Dag Dag::without_arcs_into(std::string_view node) const {
  std::set<Arc> arcs;
  for (const auto& a : arcs_) {
    if (a.to != node) arcs.insert(a);
  }
  return Dag(nodes_, std::move(arcs));
}

std::set<std::pair<std::string, std::string>> Dag::skeleton() const {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& a : arcs_) out.insert(std::minmax(a.from, a.to));
  return out;
}

std::size_t skeleton_distance(const Dag& a, const Dag& b) {
  const auto sa = a.skeleton();
  const auto sb = b.skeleton();
  std::vector<std::pair<std::string, std::string>> diff;
  std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(diff));
  return diff.size();
}

// ---------------------------------------------------------------- constraints

void ArcConstraints::validate(const std::vector<std::string>& nodes) const {
  const auto idx = index_nodes(nodes);
  for (const auto* set : {&whitelist, &blacklist}) {
    for (const auto& a : *set) {
      if (!idx.contains(a.from) || !idx.contains(a.to)) throw GraphError("constraint over unknown node: " + to_string(a));
      if (a.from == a.to) throw GraphError("constraint is a self-arc: " + to_string(a));
    }
  }
  for (const auto& a : whitelist) {
    if (blacklist.contains(a)) throw GraphError("arc is both whitelisted and blacklisted: " + to_string(a));
  }
  if (!is_acyclic(nodes, whitelist)) throw GraphError("whitelist contains a cycle");
}

ArcConstraints default_constraints(const std::vector<std::string>& nodes, const ConstraintRoles& roles,
                                   const ArcConstraints& extra) {
  auto present = [&](const std::string& n) { return std::find(nodes.begin(), nodes.end(), n) != nodes.end(); };
  for (const auto* required : {&roles.time, &roles.growth}) {
    if (!present(*required)) throw GraphError("unknown node '" + *required + "' required by default constraints");
  }
  for (const auto& a : roles.feature_whitelist) {
    if (!present(a.from)) throw GraphError("unknown node '" + a.from + "' required by default constraints");
    if (!present(a.to)) throw GraphError("unknown node '" + a.to + "' required by default constraints");
  }
  const bool has_treatment = present(roles.treatment);
  auto is_feature = [&](const std::string& n) {
    return n != roles.time && n != roles.growth && !(has_treatment && n == roles.treatment);
  };

  ArcConstraints c;
  for (const auto& from : nodes) {
    for (const auto& to : nodes) {
      if (from == to) continue;
      const bool into_fixed = to == roles.time || (has_treatment && to == roles.treatment);
      const bool feature_to_growth = is_feature(from) && to == roles.growth;
      if (into_fixed || feature_to_growth) c.blacklist.insert({from, to});
    }
  }
  for (const auto& a : roles.feature_whitelist) c.whitelist.insert(a);
  c.whitelist.insert({roles.time, roles.growth});

  c.whitelist.insert(extra.whitelist.begin(), extra.whitelist.end());
  c.blacklist.insert(extra.blacklist.begin(), extra.blacklist.end());
  c.validate(nodes);
  return c;
}

// ---------------------------------------------------------------- DOT

namespace {

bool plain_id(const std::string& s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::string quote(const std::string& s) {
  if (plain_id(s)) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string to_dot(const Dag& dag, const std::map<Arc, double>* strengths, const std::set<Arc>* whitelist,
                   const DotStyle& style) {
  auto nodes = dag.nodes();
  std::sort(nodes.begin(), nodes.end());
  std::ostringstream out;
  out << "digraph {\n";
  for (const auto& n : nodes) out << "  " << quote(n) << ";\n";
  for (const auto& a : dag.arcs()) {  // std::set order: sorted by (from, to)
    out << "  " << quote(a.from) << " -> " << quote(a.to);
    std::vector<std::string> attrs;
    if (strengths) {
      const auto it = strengths->find(a);
      const double s = it == strengths->end() ? 0.0 : it->second;
      attrs.push_back("penwidth=" + fixed(style.max_penwidth * s, 4));
      attrs.push_back("label=" + quote(fixed(s, 2)));
    }
    if (whitelist && whitelist->contains(a)) attrs.push_back("color=" + style.whitelist_color);
    if (!attrs.empty()) {
      out << " [";
      for (std::size_t i = 0; i < attrs.size(); ++i) out << (i ? ", " : "") << attrs[i];
      out << "]";
    }
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace clgbn
