#pragma once

#include <span>
#include <string>
#include <vector>

#include "clgbn/dataset.hpp"

namespace clgbn {

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // symmetric, unit diagonal
};

struct CorrelationEdge {
  std::string a;
  std::string b;
  double r = 0.0;  // signed; the edge weight is |r|
};

struct UndirectedGraph {
  std::vector<std::string> nodes;
  std::vector<CorrelationEdge> edges;
};

struct CorrelationNetwork {
  CorrelationMatrix matrix;
  UndirectedGraph graph;
  double threshold = 0.4;
};

/// Pearson product-moment correlation. Throws NumericalError when either vector is constant.
double pearson(std::span<const double> xa, std::span<const double> xb);

/// Correlations over the continuous columns plus binary discrete columns coded 0/1 (columns with
/// three or more levels are skipped). Edge (a, b) is present iff |r_ab| > threshold.
CorrelationNetwork correlation_network(const Dataset& data, double threshold = 0.4);

std::string matrix_to_text(const CorrelationMatrix& m, char delimiter = ',');
/// Undirected DOT; edge labels carry r rounded to two decimals.
std::string network_to_dot(const CorrelationNetwork& net);

}  // namespace clgbn
