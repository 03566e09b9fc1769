#include "aspem/subaspect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace aspem {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

// connectivity of the node-type graph induced by the edge set
bool connected(const SchemaGraph& schema, const std::vector<EdgeTypeId>& edges,
               const std::vector<NodeTypeId>& types) {
  if (types.empty()) return false;
  std::set<NodeTypeId> seen{types[0]};
  bool grew = true;
  while (grew) {
    grew = false;
    for (EdgeTypeId r : edges) {
      const SchemaEdge& e = schema.edge(r);
      bool s = seen.count(e.src_type), d = seen.count(e.dst_type);
      if (s != d) {
        seen.insert(s ? e.dst_type : e.src_type);
        grew = true;
      }
    }
  }
  return seen.size() == types.size();
}

}  // namespace

Aspect Aspect::from_edge_types(const SchemaGraph& schema, std::vector<EdgeTypeId> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  if (edges.empty()) fail("aspect: edge type set is empty");
  std::set<NodeTypeId> types;
  for (EdgeTypeId r : edges) {
    const SchemaEdge& e = schema.edge(r);
    types.insert(e.src_type);
    types.insert(e.dst_type);
  }
  Aspect a;
  a.edge_types = std::move(edges);
  a.node_types.assign(types.begin(), types.end());
  if (!connected(schema, a.edge_types, a.node_types))
    fail("aspect: edge types do not form a connected subgraph of the schema");
  for (NodeTypeId t : a.node_types) a.name += schema.node_types.name(t);
  return a;
}

Aspect Aspect::from_node_types(const SchemaGraph& schema, std::span<const NodeTypeId> types) {
  std::set<NodeTypeId> wanted(types.begin(), types.end());
  std::vector<EdgeTypeId> edges;
  for (const SchemaEdge& e : schema.edges)
    if (wanted.count(e.src_type) && wanted.count(e.dst_type)) edges.push_back(e.id);
  if (edges.empty()) fail("aspect: node type set induces no edge types");
  return from_edge_types(schema, std::move(edges));
}

bool Aspect::contains_edges_of(const Aspect& other) const {
  return std::includes(edge_types.begin(), edge_types.end(), other.edge_types.begin(),
                       other.edge_types.end());
}

SubAspect SubAspect::make(NodeTypeId center, EdgeTypeId edge_a, NodeTypeId outer_a,
                          EdgeTypeId edge_b, NodeTypeId outer_b) {
  if (edge_a == edge_b) fail("sub-aspect: edge types must be distinct");
  SubAspect s;
  s.center = center;
  if (std::tie(edge_a, outer_a) <= std::tie(edge_b, outer_b)) {
    s.left_edge = edge_a;
    s.left_type = outer_a;
    s.right_edge = edge_b;
    s.right_type = outer_b;
  } else {
    s.left_edge = edge_b;
    s.left_type = outer_b;
    s.right_edge = edge_a;
    s.right_type = outer_a;
  }
  return s;
}

std::string SubAspect::to_string(const SchemaGraph& schema) const {
  return schema.node_types.name(left_type) + "-" + schema.edge_types.name(left_edge) + "-" +
         schema.node_types.name(center) + "-" + schema.edge_types.name(right_edge) + "-" +
         schema.node_types.name(right_type);
}

namespace {

NodeTypeId outer_of(const SchemaEdge& e, NodeTypeId center) {
  if (e.src_type == center) return e.dst_type;  // schema self-loops give center itself
  return e.src_type;
}

std::vector<SubAspect> enumerate_pairs(const SchemaGraph& schema,
                                       const std::vector<EdgeTypeId>& edges) {
  std::vector<SubAspect> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    for (std::size_t j = i + 1; j < edges.size(); ++j) {
      const SchemaEdge& a = schema.edge(edges[i]);
      const SchemaEdge& b = schema.edge(edges[j]);
      for (NodeTypeId c : schema.endpoints(a.id)) {
        bool shared = (b.src_type == c || b.dst_type == c);
        if (!shared) continue;
        out.push_back(SubAspect::make(c, a.id, outer_of(a, c), b.id, outer_of(b, c)));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<SubAspect> enumerate_schema_sub_aspects(const SchemaGraph& schema) {
  std::vector<EdgeTypeId> all;
  for (const SchemaEdge& e : schema.edges) all.push_back(e.id);
  return enumerate_pairs(schema, all);
}

std::vector<SubAspect> enumerate_sub_aspects(const Aspect& a, const SchemaGraph& schema) {
  return enumerate_pairs(schema, a.edge_types);
}

void ScoreTable::set(const SubAspect& s, double score) {
  if (score < 0 || !std::isfinite(score))
    fail("score table: scores must be nonnegative and finite");
  scores_[s.key()] = score;
}

std::optional<double> ScoreTable::find(const SubAspect& s) const {
  auto it = scores_.find(s.key());
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

double ScoreTable::at(const SubAspect& s, const SchemaGraph& schema) const {
  auto v = find(s);
  if (!v) fail("score table: missing sub-aspect " + s.to_string(schema));
  return *v;
}

double inc_aspect(const ScoreTable& scores, const SchemaGraph& schema, const Aspect& a) {
  double sum = 0.0;
  for (const SubAspect& s : enumerate_sub_aspects(a, schema)) sum += scores.at(s, schema);
  return sum;
}

ScoreFile read_score_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open score file '" + path + "'");
  ScoreFile out;
  std::string line;
  int lineno = 0;
  auto note_edge = [&](const std::string& ename, NodeTypeId from, NodeTypeId to) -> EdgeTypeId {
    EdgeTypeId r = out.schema.edge_types.find(ename);
    if (r < 0) {
      r = out.schema.edge_types.add(ename);
      out.schema.edges.push_back({r, from, to, true});
      return r;
    }
    const SchemaEdge& e = out.schema.edges[r];
    bool same = (e.src_type == from && e.dst_type == to) || (e.src_type == to && e.dst_type == from);
    if (!same)
      fail(path + ":" + std::to_string(lineno) + ": edge type '" + ename +
           "' appears with inconsistent endpoints");
    return r;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag, pl, el, pc, er, pr, sc;
    if (!(ss >> tag >> pl >> el >> pc >> er >> pr >> sc) || tag != "%subaspect")
      fail(path + ":" + std::to_string(lineno) +
           ": expected '%subaspect <left> <edge> <center> <edge> <right> <score>'");
    NodeTypeId tl = out.schema.node_types.add(pl);
    NodeTypeId tc = out.schema.node_types.add(pc);
    NodeTypeId tr = out.schema.node_types.add(pr);
    EdgeTypeId rl = note_edge(el, tl, tc);
    EdgeTypeId rr = note_edge(er, tc, tr);
    double score = 0;
    try {
      std::size_t used = 0;
      score = std::stod(sc, &used);
      if (used != sc.size()) throw std::invalid_argument(sc);
    } catch (const std::exception&) {
      fail(path + ":" + std::to_string(lineno) + ": bad score field '" + sc + "'");
    }
    SubAspect s = SubAspect::make(tc, rl, tl, rr, tr);
    if (out.scores.find(s))
      fail(path + ":" + std::to_string(lineno) + ": duplicate sub-aspect " +
           s.to_string(out.schema));
    out.scores.set(s, score);
  }
  return out;
}

void write_score_file(const std::string& path, const SchemaGraph& schema,
                      const ScoreTable& scores) {
  std::ofstream out(path);
  if (!out) fail("cannot write score file '" + path + "'");
  char buf[64];
  for (const auto& [key, score] : scores.entries()) {
    auto [c, le, lt, re, rt] = key;
    std::snprintf(buf, sizeof buf, "%.9g", score);
    out << "%subaspect " << schema.node_types.name(lt) << ' ' << schema.edge_types.name(le) << ' '
        << schema.node_types.name(c) << ' ' << schema.edge_types.name(re) << ' '
        << schema.node_types.name(rt) << ' ' << buf << '\n';
  }
}

}  // namespace aspem
