#include "aspem/selection.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace aspem {

namespace {

constexpr int kMaxEdgeTypes = 20;

std::uint32_t edge_mask(const Aspect& a) {
  std::uint32_t m = 0;
  for (EdgeTypeId r : a.edge_types) m |= 1u << r;
  return m;
}

bool mask_connected(const SchemaGraph& schema, std::uint32_t mask) {
  // BFS over node types using only the masked edge types
  NodeTypeId start = -1;
  std::set<NodeTypeId> nodes;
  for (const SchemaEdge& e : schema.edges) {
    if (!(mask & (1u << e.id))) continue;
    nodes.insert(e.src_type);
    nodes.insert(e.dst_type);
    start = e.src_type;
  }
  if (start < 0) return false;
  std::set<NodeTypeId> seen{start};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const SchemaEdge& e : schema.edges) {
      if (!(mask & (1u << e.id))) continue;
      bool s = seen.count(e.src_type), d = seen.count(e.dst_type);
      if (s != d) {
        seen.insert(s ? e.dst_type : e.src_type);
        grew = true;
      }
    }
  }
  return seen.size() == nodes.size();
}

}  // namespace

std::vector<Aspect> enumerate_candidate_aspects(const SchemaGraph& schema,
                                                std::span<const NodeTypeId> anchors) {
  const int nr = schema.edge_types.size();
  if (nr > kMaxEdgeTypes)
    throw std::runtime_error("schema has " + std::to_string(nr) + " edge types, guard is " +
                             std::to_string(kMaxEdgeTypes));
  for (NodeTypeId a : anchors)
    if (a < 0 || a >= schema.node_types.size()) return {};

  std::vector<Aspect> out;
  for (std::uint32_t mask = 1; mask < (1u << nr); ++mask) {
    if (!mask_connected(schema, mask)) continue;
    std::set<NodeTypeId> types;
    for (const SchemaEdge& e : schema.edges)
      if (mask & (1u << e.id)) {
        types.insert(e.src_type);
        types.insert(e.dst_type);
      }
    bool has_anchors = true;
    for (NodeTypeId a : anchors) has_anchors = has_anchors && types.count(a) > 0;
    if (!has_anchors) continue;
    std::vector<EdgeTypeId> edges;
    for (EdgeTypeId r = 0; r < nr; ++r)
      if (mask & (1u << r)) edges.push_back(r);
    out.push_back(Aspect::from_edge_types(schema, std::move(edges)));
  }
  std::sort(out.begin(), out.end(), [](const Aspect& a, const Aspect& b) {
    if (a.edge_types.size() != b.edge_types.size())
      return a.edge_types.size() < b.edge_types.size();
    return a.edge_types < b.edge_types;
  });
  return out;
}

std::vector<Aspect> select_aspects(const ScoreTable& scores, const SchemaGraph& schema,
                                   double theta, std::span<const NodeTypeId> anchors) {
  if (theta < 0) throw std::invalid_argument("select_aspects: theta must be nonnegative");
  std::vector<Aspect> candidates = enumerate_candidate_aspects(schema, anchors);
  std::vector<Aspect> eligible;
  for (Aspect& a : candidates)
    if (inc_aspect(scores, schema, a) <= theta) eligible.push_back(std::move(a));

  std::vector<std::uint32_t> masks;
  masks.reserve(eligible.size());
  for (const Aspect& a : eligible) masks.push_back(edge_mask(a));

  std::vector<Aspect> selected;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < eligible.size() && maximal; ++j)
      if (i != j && (masks[i] & masks[j]) == masks[i] && masks[i] != masks[j]) maximal = false;
    if (maximal) selected.push_back(eligible[i]);
  }
  std::sort(selected.begin(), selected.end(),
            [](const Aspect& a, const Aspect& b) { return a.name < b.name; });
  return selected;
}

double choose_threshold(const ScoreTable& scores, const SchemaGraph& schema, NodeTypeId anchor) {
  if (anchor < 0 || anchor >= schema.node_types.size())
    throw std::invalid_argument("choose_threshold: anchor type not in schema");
  std::vector<NodeTypeId> anchors{anchor};
  std::vector<Aspect> candidates = enumerate_candidate_aspects(schema, anchors);

  std::set<NodeTypeId> reachable;
  for (const Aspect& a : candidates) reachable.insert(a.node_types.begin(), a.node_types.end());
  std::string missing;
  for (NodeTypeId t = 0; t < schema.node_types.size(); ++t)
    if (!reachable.count(t)) missing += (missing.empty() ? "" : ", ") + schema.node_types.name(t);
  if (!missing.empty())
    throw std::runtime_error("choose_threshold: node types unreachable from anchor '" +
                             schema.node_types.name(anchor) + "': " + missing);

  std::vector<double> incs;
  incs.reserve(candidates.size());
  for (const Aspect& a : candidates) incs.push_back(inc_aspect(scores, schema, a));

  std::vector<double> thresholds = incs;
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const std::size_t want = static_cast<std::size_t>(schema.node_types.size());
  for (double theta : thresholds) {
    std::set<NodeTypeId> covered;
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (incs[i] <= theta)
        covered.insert(candidates[i].node_types.begin(), candidates[i].node_types.end());
    if (covered.size() >= want) return theta;
  }
  // unreachable: the largest threshold admits every candidate
  throw std::logic_error("choose_threshold: coverage not reached");
}

}  // namespace aspem
