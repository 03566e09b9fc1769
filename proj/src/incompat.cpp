#include "aspem/incompat.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace aspem {

namespace {

// Center-outward view of one side of a sub-aspect. If the edge type is
// declared with the center as source we walk out-arcs, otherwise in-arcs;
// rows are normalized by the corresponding weighted degree.
struct SideView {
  const EdgeTypeStore* store = nullptr;
  bool forward = true;

  double degree(NodeId u) const {
    return forward ? store->out_degree[u] : store->in_degree[u];
  }
  // normalized row entries (outer node, probability) of center u
  template <class Fn>
  void row(NodeId u, Fn&& fn) const {
    double d = degree(u);
    if (d <= 0) return;
    if (forward)
      for (const auto& a : store->out_arcs(u)) fn(a.dst, a.weight / d);
    else
      for (const auto& a : store->in_arcs(u)) fn(a.node, a.weight / d);
  }
  // centers adjacent to outer node t, with their row value at t
  template <class Fn>
  void column(NodeId t, Fn&& fn) const {
    if (forward)
      for (const auto& a : store->in_arcs(t)) fn(a.node, a.weight / store->out_degree[a.node]);
    else
      for (const auto& a : store->out_arcs(t)) fn(a.dst, a.weight / store->in_degree[a.dst]);
  }
};

SideView make_side(const HIN& hin, EdgeTypeId edge, NodeTypeId center) {
  SideView v;
  v.store = &hin.edges(edge);
  v.forward = hin.schema().edge(edge).src_type == center;
  return v;
}

void check_center(const HIN& hin, NodeId u, const SubAspect& s) {
  if (u < 0 || u >= hin.num_nodes())
    throw std::runtime_error("gamma: unknown node id " + std::to_string(u));
  if (hin.node_type(u) != s.center)
    throw std::runtime_error("gamma: node '" + hin.node_name(u) + "' has type '" +
                             hin.schema().node_types.name(hin.node_type(u)) +
                             "', sub-aspect center is '" +
                             hin.schema().node_types.name(s.center) + "'");
}

// Column sums of the normalized adjacency, indexed by outer node id:
// colsum[t] = sum over centers of P[center, t].
std::vector<double> column_sums(const HIN& hin, const SideView& side) {
  std::vector<double> colsum(hin.num_nodes(), 0.0);
  if (side.forward) {
    for (const auto& a : side.store->arcs) colsum[a.dst] += a.weight / side.store->out_degree[a.src];
  } else {
    for (const auto& a : side.store->arcs) colsum[a.src] += a.weight / side.store->in_degree[a.dst];
  }
  return colsum;
}

struct GammaScratch {
  std::unordered_map<NodeId, double> x, y;
};

// gamma via the sparse identity sum(max) = sum(x) + sum(y) - sum(min):
// the per-side totals come from precomputed column sums and only centers
// sharing a neighbor on both sides contribute to sum(min).
GammaResult gamma_with(NodeId u, const SideView& left, const SideView& right,
                       const std::vector<double>& left_colsum,
                       const std::vector<double>& right_colsum, GammaScratch& scratch) {
  if (left.degree(u) <= 0 || right.degree(u) <= 0) return {true, 0.0};

  double sum_x = 0.0, sum_y = 0.0;
  scratch.x.clear();
  scratch.y.clear();
  right.row(u, [&](NodeId t, double p) {
    sum_x += p * right_colsum[t];
    right.column(t, [&](NodeId cand, double q) { scratch.x[cand] += p * q; });
  });
  left.row(u, [&](NodeId t, double p) {
    sum_y += p * left_colsum[t];
    left.column(t, [&](NodeId cand, double q) { scratch.y[cand] += p * q; });
  });

  double sum_min = 0.0;
  const auto& small = scratch.x.size() <= scratch.y.size() ? scratch.x : scratch.y;
  const auto& other = scratch.x.size() <= scratch.y.size() ? scratch.y : scratch.x;
  for (const auto& [cand, v] : small) {
    auto it = other.find(cand);
    if (it != other.end()) sum_min += std::min(v, it->second);
  }
  // u itself always appears on both sides, so sum_min > 0 here
  return {false, (sum_x + sum_y - sum_min) / sum_min - 1.0};
}

}  // namespace

GammaResult gamma(const HIN& hin, NodeId u, const SubAspect& s) {
  check_center(hin, u, s);
  SideView left = make_side(hin, s.left_edge, s.center);
  SideView right = make_side(hin, s.right_edge, s.center);
  GammaScratch scratch;
  return gamma_with(u, left, right, column_sums(hin, left), column_sums(hin, right), scratch);
}

double inc_simple(const HIN& hin, const SubAspect& s, int workers) {
  SideView left = make_side(hin, s.left_edge, s.center);
  SideView right = make_side(hin, s.right_edge, s.center);
  std::vector<double> left_colsum = column_sums(hin, left);
  std::vector<double> right_colsum = column_sums(hin, right);
  const std::vector<NodeId>& centers = hin.nodes_of_type(s.center);

  struct Partial {
    double sum = 0.0;
    long long count = 0;
  };
  int nw = std::max(1, workers);
  nw = static_cast<int>(std::min<std::size_t>(nw, std::max<std::size_t>(centers.size(), 1)));
  std::vector<Partial> partials(nw);

  auto work = [&](int w) {
    std::size_t lo = centers.size() * w / nw;
    std::size_t hi = centers.size() * (w + 1) / nw;
    GammaScratch scratch;
    for (std::size_t i = lo; i < hi; ++i) {
      GammaResult g =
          gamma_with(centers[i], left, right, left_colsum, right_colsum, scratch);
      if (g.excluded) continue;
      partials[w].sum += g.value;
      partials[w].count += 1;
    }
  };
  if (nw == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < nw; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  double sum = 0.0;
  long long count = 0;
  for (const Partial& p : partials) {  // fixed reduction order
    sum += p.sum;
    count += p.count;
  }
  if (count == 0) {
    std::cerr << "warning: no center of type '" << hin.schema().node_types.name(s.center)
              << "' has edges on both sides of " << s.to_string(hin.schema())
              << "; incompatibility defaults to 0\n";
    return 0.0;
  }
  return sum / static_cast<double>(count);
}

ScoreTable compute_scores(const HIN& hin, int workers) {
  ScoreTable table;
  for (const SubAspect& s : enumerate_schema_sub_aspects(hin.schema()))
    table.set(s, inc_simple(hin, s, workers));
  return table;
}

}  // namespace aspem
