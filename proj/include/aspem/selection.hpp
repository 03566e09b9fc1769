#pragma once

#include <span>

#include "aspem/subaspect.hpp"

namespace aspem {

// All connected edge-type subsets of the schema whose induced node types
// contain every anchor, ordered by (edge count, edge ids). Guarded to
// schemas with at most 20 edge types.
std::vector<Aspect> enumerate_candidate_aspects(const SchemaGraph& schema,
                                                std::span<const NodeTypeId> anchors);

// Representative aspects under threshold theta: candidates with
// inc_aspect <= theta (inclusive) that are not strictly contained in any
// other such candidate. Result sorted by aspect name.
std::vector<Aspect> select_aspects(const ScoreTable& scores, const SchemaGraph& schema,
                                   double theta, std::span<const NodeTypeId> anchors);

// Smallest value in {inc_aspect(candidate)} such that every schema node
// type co-occurs with the anchor in at least one eligible candidate.
// Throws, naming the unreachable types, if no threshold can cover them.
double choose_threshold(const ScoreTable& scores, const SchemaGraph& schema, NodeTypeId anchor);

}  // namespace aspem
