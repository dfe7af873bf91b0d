#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clgbn {

struct Arc {
  std::string from;
  std::string to;

  auto operator<=>(const Arc&) const = default;
};

std::string to_string(const Arc& arc);

/// Directed acyclic graph over named nodes. Values are validated on construction and never
/// mutated afterwards; `with_arc`/`without_arc` return new graphs.
class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> nodes, std::set<Arc> arcs = {});

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::set<Arc>& arcs() const { return arcs_; }
  bool has_node(std::string_view name) const;
  bool has_arc(const Arc& arc) const { return arcs_.contains(arc); }
  /// Sorted lexicographically.
  std::vector<std::string> parents(std::string_view node) const;
  std::vector<std::string> children(std::string_view node) const;
  /// Kahn order; ties broken by node declaration order.
  std::vector<std::string> topological_order() const;

  Dag with_arc(const Arc& arc) const;
  Dag without_arc(const Arc& arc) const;
  Dag without_arcs_into(std::string_view node) const;

  /// Unordered adjacent pairs with first < second.
  std::set<std::pair<std::string, std::string>> skeleton() const;

  bool operator==(const Dag&) const = default;

 private:
  std::vector<std::string> nodes_;
  std::set<Arc> arcs_;
};

bool is_acyclic(const std::vector<std::string>& nodes, const std::set<Arc>& arcs);
/// Topological order of a candidate graph, or nullopt when it has a cycle.
std::optional<std::vector<std::string>> topological_sort(const std::vector<std::string>& nodes,
                                                         const std::set<Arc>& arcs);
/// Arcs of one directed cycle, if any.
std::optional<std::vector<Arc>> find_cycle(const std::vector<std::string>& nodes, const std::set<Arc>& arcs);

/// Number of unordered node pairs adjacent in exactly one of the two graphs.
std::size_t skeleton_distance(const Dag& a, const Dag& b);

struct ArcConstraints {
  std::set<Arc> whitelist;
  std::set<Arc> blacklist;

  /// Throws GraphError on whitelist/blacklist overlap, a cyclic whitelist, or arcs over unknown nodes.
  void validate(const std::vector<std::string>& nodes) const;
  bool forbids(const Arc& arc) const { return blacklist.contains(arc); }
  bool requires_arc(const Arc& arc) const { return whitelist.contains(arc); }
};

/// Names of the nodes playing the fixed roles in the default constraint set.
struct ConstraintRoles {
  std::string time = "dT";
  std::string treatment = "Treatment";
  std::string growth = "Growth";
  std::vector<Arc> feature_whitelist = {{"dANB", "dIMPA"}, {"dPPPM", "dIMPA"}};
};

/// Prior-knowledge constraints over the difference variables:
///   - no arc into the time or treatment node from any node;
///   - no arc from a feature into the growth node;
///   - whitelist the feature arcs in `roles` and time -> growth.
/// Every node that is not time/treatment/growth counts as a feature. The treatment node is optional.
/// `extra` is merged in afterwards; a whitelisted arc that ends up blacklisted raises GraphError.
ArcConstraints default_constraints(const std::vector<std::string>& nodes, const ConstraintRoles& roles = {},
                                   const ArcConstraints& extra = {});

struct DotStyle {
  /// Pen width for an arc of strength 1.0; widths scale linearly with strength.
  double max_penwidth = 4.0;
  std::string whitelist_color = "red";
};

/// Deterministic Graphviz text; nodes and arcs sorted by name.
std::string to_dot(const Dag& dag, const std::map<Arc, double>* strengths = nullptr,
                   const std::set<Arc>* whitelist = nullptr, const DotStyle& style = {});

}  // namespace clgbn
