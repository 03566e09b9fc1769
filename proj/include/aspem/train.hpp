#pragma once

#include <cstdint>
#include <span>

#include "aspem/alias.hpp"
#include "aspem/embedding.hpp"
#include "aspem/hin.hpp"
#include "aspem/subaspect.hpp"

namespace aspem {

struct TrainConfig {
  int dim = 100;
  int negatives = 5;
  long long samples = 1'000'000;
  double initial_lr = 0.025;
  int workers = 1;
  std::uint64_t seed = 1;
  double noise_power = 0.75;

  void validate() const;  // dim>=1, negatives>=0, samples>=1, initial_lr>0
};

// Negative-sample source: per edge type, an alias table over the nodes of
// the arc's destination type with positive weighted in-degree, weighted by
// in_degree^power. Undirected edge types carry one table per endpoint type
// since their decomposed arcs point both ways.
class NoiseSampler {
 public:
  NoiseSampler(const HIN& hin, std::span<const EdgeTypeId> edge_types, double power);

  NodeId sample(EdgeTypeId r, NodeTypeId target_type, Rng& rng) const;

  // support nodes and their unnormalized weights, for statistical tests
  std::span<const NodeId> support(EdgeTypeId r, NodeTypeId target_type) const;
  std::span<const double> weights(EdgeTypeId r, NodeTypeId target_type) const;

 private:
  struct Table {
    EdgeTypeId edge = -1;
    NodeTypeId type = -1;
    std::vector<NodeId> nodes;
    std::vector<double> weights;
    AliasTable alias;
  };
  const Table& table_for(EdgeTypeId r, NodeTypeId target_type) const;
  std::vector<Table> tables_;
};

// Type-restricted softmax probability of observing v given u over the
// candidate rows (max-subtracted). Throws if v is not among candidates.
double softmax_prob(const EmbeddingTable& table, int u_row, int v_row,
                    std::span<const int> candidate_rows);

// W_uv / out-degree of u under r; throws when u has no outgoing type-r edges.
double empirical_prob(const HIN& hin, NodeId u, NodeId v, EdgeTypeId r);

// Exact weighted negative log-likelihood of the aspect's edges under the
// type-restricted softmax, each edge type normalized by its total weight.
// Full partition sums per source; diagnostic use only.
double objective(const HIN& hin, const EmbeddingTable& table, const Aspect& a);

// One SGNS ascent step on log sigmoid(fu.fv) + sum_i log sigmoid(-fu.fn_i).
// Gradients are accumulated per distinct row from the pre-step values, then
// applied, so repeated rows (v among negatives, self-loops) get the exact
// joint gradient.
void sgns_step(EmbeddingTable& table, int u_row, int v_row, std::span<const int> negative_rows,
               double lr);

// Draws negatives of the arc destination's type from the noise sampler,
// then applies sgns_step.
void sgns_step(EmbeddingTable& table, const HIN& hin, const EdgeTypeStore::Arc& arc,
               EdgeTypeId r, const NoiseSampler& noise, int negatives, double lr, Rng& rng);

// Edge-sampled skip-gram training of one aspect: per iteration draw an edge
// type uniformly from the aspect, an edge proportional to its weight, and
// `negatives` noise nodes; learning rate decays linearly to a 1e-4 floor.
// Workers > 1 update the shared table lock-free; a single worker is
// bit-reproducible for a fixed seed.
EmbeddingTable train_aspect(const HIN& hin, const Aspect& a, const TrainConfig& cfg);

}  // namespace aspem
