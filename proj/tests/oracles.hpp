#pragma once

// Independent brute-force reference implementations used to pin expected
// values. These deliberately avoid the library's sparse code paths.

#include <cmath>
#include <vector>

#include "aspem/hin.hpp"
#include "aspem/subaspect.hpp"

namespace oracle {

// Dense center-outward row-normalized adjacency of one sub-aspect side,
// built straight from the arc list: rows indexed by center node position,
// columns by global node id.
inline std::vector<std::vector<double>> dense_side(const aspem::HIN& hin, aspem::EdgeTypeId edge,
                                                   aspem::NodeTypeId center) {
  using namespace aspem;
  const auto& centers = hin.nodes_of_type(center);
  std::vector<int> center_pos(hin.num_nodes(), -1);
  for (std::size_t i = 0; i < centers.size(); ++i) center_pos[centers[i]] = static_cast<int>(i);

  std::vector<std::vector<double>> p(centers.size(),
                                     std::vector<double>(hin.num_nodes(), 0.0));
  bool forward = hin.schema().edge(edge).src_type == center;
  for (const auto& arc : hin.edges(edge).arcs) {
    if (forward) {
      if (center_pos[arc.src] >= 0) p[center_pos[arc.src]][arc.dst] += arc.weight;
    } else {
      if (center_pos[arc.dst] >= 0) p[center_pos[arc.dst]][arc.src] += arc.weight;
    }
  }
  for (auto& row : p) {
    double sum = 0.0;
    for (double v : row) sum += v;
    if (sum > 0)
      for (double& v : row) v /= sum;
  }
  return p;
}

struct DenseGamma {
  bool excluded = false;
  double value = 0.0;
};

// Full O(centers^2 * nodes) evaluation of gamma for every center.
inline std::vector<DenseGamma> dense_gamma_all(const aspem::HIN& hin, const aspem::SubAspect& s) {
  using namespace aspem;
  auto left = dense_side(hin, s.left_edge, s.center);
  auto right = dense_side(hin, s.right_edge, s.center);
  const std::size_t n_centers = left.size();
  const std::size_t n_nodes = static_cast<std::size_t>(hin.num_nodes());

  std::vector<DenseGamma> out(n_centers);
  for (std::size_t i = 0; i < n_centers; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n_centers; ++j) {
      double x = 0.0, y = 0.0;
      for (std::size_t t = 0; t < n_nodes; ++t) {
        x += right[i][t] * right[j][t];
        y += left[i][t] * left[j][t];
      }
      num += std::max(x, y);
      den += std::min(x, y);
    }
    if (den == 0.0)
      out[i].excluded = true;
    else
      out[i].value = num / den - 1.0;
  }
  return out;
}

inline double dense_inc_simple(const aspem::HIN& hin, const aspem::SubAspect& s,
                               bool* empty = nullptr) {
  auto gammas = dense_gamma_all(hin, s);
  double sum = 0.0;
  long long count = 0;
  for (const DenseGamma& g : gammas) {
    if (g.excluded) continue;
    sum += g.value;
    ++count;
  }
  if (empty) *empty = count == 0;
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

// weighted degrees by scanning every arc of the type
inline std::pair<double, double> scan_degrees(const aspem::HIN& hin, aspem::NodeId u,
                                              aspem::EdgeTypeId r) {
  double out = 0.0, in = 0.0;
  for (const auto& arc : hin.edges(r).arcs) {
    if (arc.src == u) out += arc.weight;
    if (arc.dst == u) in += arc.weight;
  }
  return {out, in};
}

}  // namespace oracle
