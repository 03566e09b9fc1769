#include "aspem/hin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aspem {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

[[noreturn]] void parse_fail(const std::string& file, int line, const std::string& msg) {
  fail(file + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_weight(const std::string& file, int line, const std::string& tok) {
  std::size_t used = 0;
  double w = 0;
  try {
    w = std::stod(tok, &used);
  } catch (const std::exception&) {
    parse_fail(file, line, "bad weight field '" + tok + "'");
  }
  if (used != tok.size() || !std::isfinite(w)) parse_fail(file, line, "bad weight field '" + tok + "'");
  if (w < 0) parse_fail(file, line, "negative weight '" + tok + "'");
  return w;
}

}  // namespace

std::int32_t NameRegistry::add(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  std::int32_t id = static_cast<std::int32_t>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  return id;
}

std::int32_t NameRegistry::find(const std::string& name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? -1 : it->second;
}

const std::string& NameRegistry::name(std::int32_t id) const {
  if (id < 0 || id >= size()) fail("registry id " + std::to_string(id) + " out of range");
  return names_[id];
}

const SchemaEdge& SchemaGraph::edge(EdgeTypeId r) const {
  if (r < 0 || r >= static_cast<EdgeTypeId>(edges.size()))
    fail("edge type id " + std::to_string(r) + " out of range");
  return edges[r];
}

std::vector<NodeTypeId> SchemaGraph::endpoints(EdgeTypeId r) const {
  const SchemaEdge& e = edge(r);
  if (e.src_type == e.dst_type) return {e.src_type};
  return {e.src_type, e.dst_type};
}

std::pair<RawEdge, RawEdge> decompose_undirected(const RawEdge& e) {
  if (!e.undirected) fail("decompose_undirected: edge " + e.src + "->" + e.dst + " is directed");
  RawEdge fwd{e.src, e.dst, e.weight, false};
  RawEdge rev{e.dst, e.src, e.weight, false};
  return {fwd, rev};
}

double EdgeTypeStore::arc_weight(NodeId u, NodeId v) const {
  auto span = out_arcs(u);
  auto it = std::lower_bound(span.begin(), span.end(), v,
                             [](const Arc& a, NodeId x) { return a.dst < x; });
  if (it != span.end() && it->dst == v) return it->weight;
  return 0.0;
}

NodeTypeId HIN::node_type(NodeId u) const {
  if (u < 0 || u >= num_nodes()) fail("node id " + std::to_string(u) + " out of range");
  return node_types_[u];
}

const std::string& HIN::node_name(NodeId u) const {
  if (u < 0 || u >= num_nodes()) fail("node id " + std::to_string(u) + " out of range");
  return node_names_[u];
}

NodeId HIN::find_node(const std::string& name) const {
  auto it = node_index_.find(name);
  return it == node_index_.end() ? kNoNode : it->second;
}

const std::vector<NodeId>& HIN::nodes_of_type(NodeTypeId t) const {
  if (t < 0 || t >= static_cast<NodeTypeId>(by_type_.size()))
    fail("node type id " + std::to_string(t) + " out of range");
  return by_type_[t];
}

const EdgeTypeStore& HIN::edges(EdgeTypeId r) const {
  if (r < 0 || r >= num_edge_types()) fail("edge type id " + std::to_string(r) + " out of range");
  return stores_[r];
}

std::pair<double, double> HIN::degrees(NodeId u, EdgeTypeId r) const {
  if (u < 0 || u >= num_nodes()) fail("degrees: unknown node id " + std::to_string(u));
  const EdgeTypeStore& s = edges(r);
  return {s.out_degree[u], s.in_degree[u]};
}

NodeTypeId HINBuilder::add_node_type(const std::string& name) {
  return schema_.node_types.add(name);
}

EdgeTypeId HINBuilder::add_edge_type(const std::string& name, NodeTypeId src_type,
                                     NodeTypeId dst_type, bool undirected) {
  if (schema_.edge_types.find(name) >= 0) fail("duplicate edge type '" + name + "'");
  if (src_type < 0 || src_type >= schema_.node_types.size() || dst_type < 0 ||
      dst_type >= schema_.node_types.size())
    fail("edge type '" + name + "' references an unknown node type");
  EdgeTypeId id = schema_.edge_types.add(name);
  schema_.edges.push_back({id, src_type, dst_type, undirected});
  pending_.emplace_back();
  return id;
}

NodeId HINBuilder::add_node(const std::string& id, NodeTypeId type) {
  if (type < 0 || type >= schema_.node_types.size())
    fail("node '" + id + "' has unknown type id " + std::to_string(type));
  if (node_index_.count(id)) fail("duplicate node id '" + id + "'");
  NodeId n = static_cast<NodeId>(node_names_.size());
  node_names_.push_back(id);
  node_types_.push_back(type);
  node_index_.emplace(id, n);
  return n;
}

void HINBuilder::add_edge(const std::string& src, const std::string& dst, EdgeTypeId type,
                          double weight) {
  add_arc(src, dst, type, weight);
  if (type >= 0 && type < static_cast<EdgeTypeId>(schema_.edges.size()) &&
      schema_.edges[type].undirected) {
    EdgeTypeStore::Arc fwd = pending_[type].back();
    pending_[type].push_back({fwd.dst, fwd.src, weight});
  }
}

void HINBuilder::add_arc(const std::string& src, const std::string& dst, EdgeTypeId type,
                         double weight) {
  if (type < 0 || type >= static_cast<EdgeTypeId>(schema_.edges.size()))
    fail("unknown edge type id " + std::to_string(type));
  if (weight < 0 || !std::isfinite(weight))
    fail("edge " + src + "->" + dst + ": weight must be a nonnegative finite number");
  auto su = node_index_.find(src);
  if (su == node_index_.end()) fail("edge references absent node id '" + src + "'");
  auto sv = node_index_.find(dst);
  if (sv == node_index_.end()) fail("edge references absent node id '" + dst + "'");
  const SchemaEdge& decl = schema_.edges[type];
  NodeTypeId tu = node_types_[su->second];
  NodeTypeId tv = node_types_[sv->second];
  bool forward_ok = (tu == decl.src_type && tv == decl.dst_type);
  bool reverse_ok = (tu == decl.dst_type && tv == decl.src_type);
  if (!(forward_ok || (decl.undirected && reverse_ok)))
    fail("edge " + src + "->" + dst + ": endpoint types (" +
         schema_.node_types.name(tu) + "," + schema_.node_types.name(tv) +
         ") do not match edge type '" + schema_.edge_types.name(type) + "'");
  pending_[type].push_back({su->second, sv->second, weight});
}

HIN HINBuilder::build() {
  HIN hin;
  hin.schema_ = schema_;
  hin.node_names_ = node_names_;
  hin.node_types_ = node_types_;
  hin.node_index_ = node_index_;
  hin.by_type_.assign(schema_.node_types.size(), {});
  for (NodeId u = 0; u < static_cast<NodeId>(node_types_.size()); ++u)
    hin.by_type_[node_types_[u]].push_back(u);

  const std::int64_t n = static_cast<std::int64_t>(node_names_.size());
  hin.stores_.resize(pending_.size());
  for (std::size_t r = 0; r < pending_.size(); ++r) {
    EdgeTypeStore& store = hin.stores_[r];
    auto arcs = pending_[r];
    // stable: duplicates merge in insertion order, so the two directions of
    // an undirected pair accumulate identically
    std::stable_sort(arcs.begin(), arcs.end(), [](const auto& a, const auto& b) {
      return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    // merge duplicates by weight sum
    store.arcs.reserve(arcs.size());
    for (const auto& a : arcs) {
      if (!store.arcs.empty() && store.arcs.back().src == a.src && store.arcs.back().dst == a.dst)
        store.arcs.back().weight += a.weight;
      else
        store.arcs.push_back(a);
    }

    store.out_ptr.assign(n + 1, 0);
    store.in_ptr.assign(n + 1, 0);
    store.out_degree.assign(n, 0.0);
    store.in_degree.assign(n, 0.0);
    for (const auto& a : store.arcs) {
      store.out_ptr[a.src + 1]++;
      store.in_ptr[a.dst + 1]++;
      store.out_degree[a.src] += a.weight;
      store.in_degree[a.dst] += a.weight;
      store.total_weight += a.weight;
    }
    for (std::int64_t i = 1; i <= n; ++i) {
      store.out_ptr[i] += store.out_ptr[i - 1];
      store.in_ptr[i] += store.in_ptr[i - 1];
    }
    store.in_adj.resize(store.arcs.size());
    std::vector<std::int64_t> cursor(store.in_ptr.begin(), store.in_ptr.end() - 1);
    for (const auto& a : store.arcs) store.in_adj[cursor[a.dst]++] = {a.src, a.weight};
  }
  return hin;
}

HIN ingest(const std::string& node_file, const std::string& edge_file) {
  HINBuilder builder;

  std::ifstream nodes(node_file);
  if (!nodes) fail("cannot open node file '" + node_file + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(nodes, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      parse_fail(node_file, lineno, "expected '<node_id>\\t<node_type>', got '" + line + "'");
    NodeTypeId t = builder.add_node_type(fields[1]);
    try {
      builder.add_node(fields[0], t);
    } catch (const std::exception& e) {
      parse_fail(node_file, lineno, e.what());
    }
  }

  std::ifstream edges(edge_file);
  if (!edges) fail("cannot open edge file '" + edge_file + "'");
  lineno = 0;
  while (std::getline(edges, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '%') {
      auto tok = split_ws(line);
      if (tok.size() != 5 || tok[0] != "%edgetype")
        parse_fail(edge_file, lineno, "expected '%edgetype <name> <src_type> <dst_type> <d|u>'");
      NodeTypeId st = builder.find_node_type(tok[2]);
      if (st < 0) parse_fail(edge_file, lineno, "unknown node type '" + tok[2] + "'");
      NodeTypeId dt = builder.find_node_type(tok[3]);
      if (dt < 0) parse_fail(edge_file, lineno, "unknown node type '" + tok[3] + "'");
      if (tok[4] != "d" && tok[4] != "u")
        parse_fail(edge_file, lineno, "directedness flag must be 'd' or 'u', got '" + tok[4] + "'");
      try {
        builder.add_edge_type(tok[1], st, dt, tok[4] == "u");
      } catch (const std::exception& e) {
        parse_fail(edge_file, lineno, e.what());
      }
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() != 4)
      parse_fail(edge_file, lineno, "expected '<src>\\t<dst>\\t<edge_type>\\t<weight>', got '" + line + "'");
    EdgeTypeId r = builder.find_edge_type(fields[2]);
    if (r < 0) parse_fail(edge_file, lineno, "unknown edge type '" + fields[2] + "'");
    double w = parse_weight(edge_file, lineno, fields[3]);
    try {
      builder.add_edge(fields[0], fields[1], r, w);
    } catch (const std::exception& e) {
      parse_fail(edge_file, lineno, e.what());
    }
  }
  return builder.build();
}

void write_graph(const HIN& hin, const std::string& node_file, const std::string& edge_file) {
  std::ofstream nodes(node_file);
  if (!nodes) fail("cannot write node file '" + node_file + "'");
  for (NodeId u = 0; u < hin.num_nodes(); ++u)
    nodes << hin.node_name(u) << '\t' << hin.schema().node_types.name(hin.node_type(u)) << '\n';

  std::ofstream edges(edge_file);
  if (!edges) fail("cannot write edge file '" + edge_file + "'");
  char buf[64];
  const SchemaGraph& schema = hin.schema();
  for (const SchemaEdge& e : schema.edges)
    edges << "%edgetype " << schema.edge_types.name(e.id) << ' '
          << schema.node_types.name(e.src_type) << ' ' << schema.node_types.name(e.dst_type)
          << (e.undirected ? " u\n" : " d\n");
  for (EdgeTypeId r = 0; r < hin.num_edge_types(); ++r) {
    const std::string& rname = schema.edge_types.name(r);
    bool undirected = schema.edge(r).undirected;
    for (const auto& a : hin.edges(r).arcs) {
      // undirected arcs come in symmetric pairs; emit one record per pair
      // (self-loops hold both halves merged, so store half the weight)
      double w = a.weight;
      if (undirected) {
        if (a.src > a.dst) continue;
        if (a.src == a.dst) w = a.weight / 2.0;
      }
      std::snprintf(buf, sizeof buf, "%.17g", w);
      edges << hin.node_name(a.src) << '\t' << hin.node_name(a.dst) << '\t' << rname << '\t'
            << buf << '\n';
    }
  }
}

SchemaGraph derive_schema(const HIN& hin) {
  if (hin.num_nodes() == 0) fail("derive_schema: empty graph");
  return hin.schema();
}

HIN remove_nodes(const HIN& hin, std::span<const std::string> node_ids) {
  std::vector<bool> removed(hin.num_nodes(), false);
  for (const std::string& id : node_ids) {
    NodeId u = hin.find_node(id);
    if (u != kNoNode) removed[u] = true;
  }
  HINBuilder builder;
  const SchemaGraph& schema = hin.schema();
  for (const std::string& t : schema.node_types.names()) builder.add_node_type(t);
  for (const SchemaEdge& e : schema.edges)
    builder.add_edge_type(schema.edge_types.name(e.id), e.src_type, e.dst_type, e.undirected);
  for (NodeId u = 0; u < hin.num_nodes(); ++u)
    if (!removed[u]) builder.add_node(hin.node_name(u), hin.node_type(u));
  for (EdgeTypeId r = 0; r < hin.num_edge_types(); ++r)
    for (const auto& a : hin.edges(r).arcs)
      if (!removed[a.src] && !removed[a.dst])
        builder.add_arc(hin.node_name(a.src), hin.node_name(a.dst), r, a.weight);
  return builder.build();
}

}  // namespace aspem
