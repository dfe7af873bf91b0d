#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "clgbn/averaging.hpp"
#include "clgbn/clg_model.hpp"
#include "clgbn/corrnet.hpp"
#include "clgbn/graph.hpp"
#include "clgbn/inference.hpp"
#include "clgbn/search.hpp"
#include "clgbn/validation.hpp"

namespace clgbn {

using Json = nlohmann::ordered_json;

/// Finite doubles pass through; infinities become the strings "+inf" / "-inf", NaN becomes null.
Json number(double value);

Json to_json(const Dag& dag);
Dag dag_from_json(const Json& j);

Json to_json(const ArcConstraints& constraints);

Json to_json(const ClgNetwork& model);
/// Throws DataError on malformed input and GraphError on an inconsistent network.
ClgNetwork model_from_json(const Json& j);

Json to_json(const ArcStrengthTable& table);
Json to_json(const AveragedStructure& avg, const ArcConstraints& constraints);
Json to_json(const QueryResult& result);
Json to_json(const CvReport& report);
Json to_json(const CorrelationNetwork& net);

/// One JSON object per line: the initial score, then one line per step.
void write_trace(std::ostream& out, const SearchTrace& trace);

}  // namespace clgbn
