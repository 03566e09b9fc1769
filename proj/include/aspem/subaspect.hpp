#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "aspem/hin.hpp"

namespace aspem {

// Connected subgraph of the schema: an edge type set plus the node types
// it induces. Named by the induced node type names in type-id order.
struct Aspect {
  std::string name;
  std::vector<EdgeTypeId> edge_types;  // sorted, unique, nonempty
  std::vector<NodeTypeId> node_types;  // induced endpoint types, sorted

  static Aspect from_edge_types(const SchemaGraph& schema, std::vector<EdgeTypeId> edges);
  // Induced subgraph: all edge types with both endpoints inside `types`.
  static Aspect from_node_types(const SchemaGraph& schema, std::span<const NodeTypeId> types);

  bool contains_edges_of(const Aspect& other) const;  // other.edge_types subset of ours
};

// Atomic scoring unit: two distinct edge types joined at a center node type.
// Canonical form keeps the lexicographically smaller of the tuple and its
// mirror so the two readings of an undirected pair collapse to one key.
struct SubAspect {
  NodeTypeId center = -1;
  EdgeTypeId left_edge = -1;
  NodeTypeId left_type = -1;  // outer type on the left side
  EdgeTypeId right_edge = -1;
  NodeTypeId right_type = -1;

  static SubAspect make(NodeTypeId center, EdgeTypeId edge_a, NodeTypeId outer_a,
                        EdgeTypeId edge_b, NodeTypeId outer_b);

  auto key() const { return std::tuple(center, left_edge, left_type, right_edge, right_type); }
  friend bool operator<(const SubAspect& a, const SubAspect& b) { return a.key() < b.key(); }
  friend bool operator==(const SubAspect& a, const SubAspect& b) { return a.key() == b.key(); }

  std::string to_string(const SchemaGraph& schema) const;  // "A-write-P-cite-R"
};

// All canonical sub-aspects over the schema's whole edge type set.
std::vector<SubAspect> enumerate_schema_sub_aspects(const SchemaGraph& schema);

// Canonical pairs of distinct edge types of `a` sharing a center node type,
// in deterministic (sorted-key) order.
std::vector<SubAspect> enumerate_sub_aspects(const Aspect& a, const SchemaGraph& schema);

// Map from canonical sub-aspect to its incompatibility score.
class ScoreTable {
 public:
  void set(const SubAspect& s, double score);  // rejects negative scores
  std::optional<double> find(const SubAspect& s) const;
  double at(const SubAspect& s, const SchemaGraph& schema) const;  // throws if missing
  std::size_t size() const { return scores_.size(); }

  using Key = std::tuple<NodeTypeId, EdgeTypeId, NodeTypeId, EdgeTypeId, NodeTypeId>;
  const std::map<Key, double>& entries() const { return scores_; }

 private:
  std::map<Key, double> scores_;
};

// Sum of sub-aspect scores over enumerate_sub_aspects(a), canonical order.
double inc_aspect(const ScoreTable& scores, const SchemaGraph& schema, const Aspect& a);

// Score table file: "%subaspect <pl> <el> <pc> <er> <pr> <score>" lines.
// The schema is reconstructed from the rows (endpoints only; directedness
// is unknown there, so every edge type is marked undirected).
struct ScoreFile {
  SchemaGraph schema;
  ScoreTable scores;
};
ScoreFile read_score_file(const std::string& path);
void write_score_file(const std::string& path, const SchemaGraph& schema,
                      const ScoreTable& scores);

}  // namespace aspem
