#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace aspem {

using NodeId = std::int32_t;
using NodeTypeId = std::int32_t;
using EdgeTypeId = std::int32_t;

inline constexpr NodeId kNoNode = -1;

// Interned name table. Ids are dense and start at 0; names are unique.
class NameRegistry {
 public:
  std::int32_t add(const std::string& name);         // idempotent
  std::int32_t find(const std::string& name) const;  // -1 if unknown
  const std::string& name(std::int32_t id) const;
  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

struct SchemaEdge {
  EdgeTypeId id = -1;
  NodeTypeId src_type = -1;
  NodeTypeId dst_type = -1;
  bool undirected = false;
};

// Meta-graph of node types and typed edge declarations.
struct SchemaGraph {
  NameRegistry node_types;
  NameRegistry edge_types;
  std::vector<SchemaEdge> edges;  // indexed by EdgeTypeId

  const SchemaEdge& edge(EdgeTypeId r) const;
  // distinct endpoint types of r (one entry for schema self-loops)
  std::vector<NodeTypeId> endpoints(EdgeTypeId r) const;
};

// One input edge before normalization.
struct RawEdge {
  std::string src;
  std::string dst;
  double weight = 1.0;
  bool undirected = false;
};

// Splits an undirected edge into its two directed halves.
// Throws if the edge is not marked undirected.
std::pair<RawEdge, RawEdge> decompose_undirected(const RawEdge& e);

struct WeightedArc {
  NodeId node;
  double weight;
};

// Directed, merged, indexed edges of a single type.
struct EdgeTypeStore {
  struct Arc {
    NodeId src;
    NodeId dst;
    double weight;
  };
  std::vector<Arc> arcs;              // sorted by (src, dst), duplicates merged
  std::vector<std::int64_t> out_ptr;  // CSR over arcs by src, size num_nodes+1
  std::vector<WeightedArc> in_adj;    // in-adjacency sorted by (dst, src)
  std::vector<std::int64_t> in_ptr;   // CSR over in_adj by dst, size num_nodes+1
  std::vector<double> out_degree;     // weighted, size num_nodes
  std::vector<double> in_degree;
  double total_weight = 0.0;  // sum over arcs

  std::span<const Arc> out_arcs(NodeId u) const {
    return {arcs.data() + out_ptr[u], arcs.data() + out_ptr[u + 1]};
  }
  std::span<const WeightedArc> in_arcs(NodeId v) const {
    return {in_adj.data() + in_ptr[v], in_adj.data() + in_ptr[v + 1]};
  }
  double arc_weight(NodeId u, NodeId v) const;  // 0 if absent
};

// Immutable typed weighted directed graph. Build via HINBuilder or ingest().
class HIN {
 public:
  std::int32_t num_nodes() const { return static_cast<std::int32_t>(node_types_.size()); }
  NodeTypeId node_type(NodeId u) const;
  const std::string& node_name(NodeId u) const;
  NodeId find_node(const std::string& name) const;  // kNoNode if unknown
  const std::vector<NodeId>& nodes_of_type(NodeTypeId t) const;
  const SchemaGraph& schema() const { return schema_; }
  std::int32_t num_edge_types() const { return static_cast<std::int32_t>(stores_.size()); }
  const EdgeTypeStore& edges(EdgeTypeId r) const;

  // (out, in) weighted degree of u under edge type r; throws on unknown node
  std::pair<double, double> degrees(NodeId u, EdgeTypeId r) const;

 private:
  friend class HINBuilder;
  SchemaGraph schema_;
  std::vector<std::string> node_names_;
  std::vector<NodeTypeId> node_types_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::vector<std::vector<NodeId>> by_type_;
  std::vector<EdgeTypeStore> stores_;
};

class HINBuilder {
 public:
  NodeTypeId add_node_type(const std::string& name);
  EdgeTypeId add_edge_type(const std::string& name, NodeTypeId src_type, NodeTypeId dst_type,
                           bool undirected);
  NodeId add_node(const std::string& id, NodeTypeId type);
  // Validates endpoints and weight; undirected types get both directed halves.
  void add_edge(const std::string& src, const std::string& dst, EdgeTypeId type, double weight);
  // Adds one pre-decomposed directed arc without expansion.
  void add_arc(const std::string& src, const std::string& dst, EdgeTypeId type, double weight);
  std::int32_t find_node_type(const std::string& name) const { return schema_.node_types.find(name); }
  std::int32_t find_edge_type(const std::string& name) const { return schema_.edge_types.find(name); }
  HIN build();  // merges duplicate (src,dst) pairs by weight sum, builds indices

 private:
  SchemaGraph schema_;
  std::vector<std::string> node_names_;
  std::vector<NodeTypeId> node_types_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::vector<std::vector<EdgeTypeStore::Arc>> pending_;  // per edge type
};

// File ingestion per the formats in the README. Parse errors report
// file, line number and the offending field.
HIN ingest(const std::string& node_file, const std::string& edge_file);

// Canonical serialization; ingest(write_graph(h)) reproduces h exactly.
void write_graph(const HIN& hin, const std::string& node_file, const std::string& edge_file);

SchemaGraph derive_schema(const HIN& hin);

// Copy of the graph without the named nodes and their incident edges.
// Schema declarations are preserved even when a type loses all members.
HIN remove_nodes(const HIN& hin, std::span<const std::string> node_ids);

}  // namespace aspem
