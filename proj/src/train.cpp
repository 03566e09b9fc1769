#include "aspem/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace aspem {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// gradient accumulator keyed by row; tiny row counts, linear scan
struct GradBuffer {
  std::vector<int> rows;
  std::vector<double> grads;  // rows.size() * dim
  int dim = 0;

  void reset(int d) {
    rows.clear();
    grads.clear();
    dim = d;
  }
  double* slot(int row) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i] == row) return grads.data() + i * dim;
    rows.push_back(row);
    grads.resize(grads.size() + dim, 0.0);
    return grads.data() + (rows.size() - 1) * dim;
  }
};

thread_local GradBuffer tls_grad;

}  // namespace

void TrainConfig::validate() const {
  if (dim < 1) fail("train config: dim must be >= 1");
  if (negatives < 0) fail("train config: negatives must be >= 0");
  if (samples < 1) fail("train config: samples must be >= 1");
  if (!(initial_lr > 0)) fail("train config: initial learning rate must be positive");
  if (workers < 1) fail("train config: workers must be >= 1");
}

NoiseSampler::NoiseSampler(const HIN& hin, std::span<const EdgeTypeId> edge_types, double power) {
  for (EdgeTypeId r : edge_types) {
    const SchemaEdge& decl = hin.schema().edge(r);
    std::vector<NodeTypeId> target_types{decl.dst_type};
    if (decl.undirected && decl.src_type != decl.dst_type) target_types.push_back(decl.src_type);
    for (NodeTypeId t : target_types) {
      std::vector<NodeId> nodes;
      std::vector<double> weights;
      const EdgeTypeStore& store = hin.edges(r);
      for (NodeId v : hin.nodes_of_type(t)) {
        double d = store.in_degree[v];
        if (d > 0) {
          nodes.push_back(v);
          weights.push_back(std::pow(d, power));
        }
      }
      if (!nodes.empty()) {
        AliasTable alias(weights);
        tables_.push_back({r, t, std::move(nodes), std::move(weights), std::move(alias)});
      }
    }
  }
}

const NoiseSampler::Table& NoiseSampler::table_for(EdgeTypeId r, NodeTypeId target_type) const {
  for (const Table& t : tables_)
    if (t.edge == r && t.type == target_type) return t;
  fail("noise sampler: no support for edge type " + std::to_string(r) + " targeting node type " +
       std::to_string(target_type));
}

NodeId NoiseSampler::sample(EdgeTypeId r, NodeTypeId target_type, Rng& rng) const {
  const Table& t = table_for(r, target_type);
  return t.nodes[t.alias.sample(rng)];
}

std::span<const NodeId> NoiseSampler::support(EdgeTypeId r, NodeTypeId target_type) const {
  return table_for(r, target_type).nodes;
}

std::span<const double> NoiseSampler::weights(EdgeTypeId r, NodeTypeId target_type) const {
  return table_for(r, target_type).weights;
}

double softmax_prob(const EmbeddingTable& table, int u_row, int v_row,
                    std::span<const int> candidate_rows) {
  if (candidate_rows.empty()) fail("softmax_prob: empty candidate set");
  auto fu = table.row(u_row);
  double max_dot = -std::numeric_limits<double>::infinity();
  for (int c : candidate_rows) max_dot = std::max(max_dot, dot(fu, table.row(c)));
  double denom = 0.0;
  bool seen_v = false;
  for (int c : candidate_rows) {
    denom += std::exp(dot(fu, table.row(c)) - max_dot);
    seen_v = seen_v || c == v_row;
  }
  if (!seen_v) fail("softmax_prob: v is not among the candidates");
  return std::exp(dot(fu, table.row(v_row)) - max_dot) / denom;
}

double empirical_prob(const HIN& hin, NodeId u, NodeId v, EdgeTypeId r) {
  const EdgeTypeStore& store = hin.edges(r);
  double out_deg = store.out_degree[u];
  if (out_deg <= 0)
    fail("empirical_prob: node '" + hin.node_name(u) + "' has no outgoing edges of type '" +
         hin.schema().edge_types.name(r) + "'");
  return store.arc_weight(u, v) / out_deg;
}

double objective(const HIN& hin, const EmbeddingTable& table, const Aspect& a) {
  if (a.edge_types.empty()) fail("objective: aspect has no edge types");
  std::vector<int> node_row(hin.num_nodes(), -1);
  for (NodeTypeId t : a.node_types) {
    for (NodeId u : hin.nodes_of_type(t)) {
      int row = table.find(hin.node_name(u));
      if (row < 0) fail("objective: table does not cover node '" + hin.node_name(u) + "'");
      node_row[u] = row;
    }
  }

  double total = 0.0;
  for (EdgeTypeId r : a.edge_types) {
    const EdgeTypeStore& store = hin.edges(r);
    if (store.total_weight <= 0) continue;
    // per (source, target-type) partition cache: (max dot, sum exp(dot-max))
    std::unordered_map<std::int64_t, std::pair<double, double>> partition;
    double sum = 0.0;
    for (const auto& arc : store.arcs) {
      NodeTypeId vt = hin.node_type(arc.dst);
      std::int64_t key = static_cast<std::int64_t>(arc.src) * hin.schema().node_types.size() + vt;
      auto it = partition.find(key);
      if (it == partition.end()) {
        auto fu = table.row(node_row[arc.src]);
        double max_dot = -std::numeric_limits<double>::infinity();
        const auto& cands = hin.nodes_of_type(vt);
        for (NodeId c : cands) max_dot = std::max(max_dot, dot(fu, table.row(node_row[c])));
        double denom = 0.0;
        for (NodeId c : cands) denom += std::exp(dot(fu, table.row(node_row[c])) - max_dot);
        it = partition.emplace(key, std::pair(max_dot, denom)).first;
      }
      auto [max_dot, denom] = it->second;
      double log_p =
          dot(table.row(node_row[arc.src]), table.row(node_row[arc.dst])) - max_dot - std::log(denom);
      sum += arc.weight * log_p;
    }
    total -= sum / store.total_weight;
  }
  return total;
}

void sgns_step(EmbeddingTable& table, int u_row, int v_row, std::span<const int> negative_rows,
               double lr) {
  const int d = table.dim();
  GradBuffer& buf = tls_grad;
  buf.reset(d);

  auto fu = table.row(u_row);
  auto fv = table.row(v_row);
  double g_pos = 1.0 - sigmoid(dot(fu, fv));  // ascent coefficient on the positive pair

  double* gu = buf.slot(u_row);
  for (int i = 0; i < d; ++i) gu[i] += g_pos * fv[i];
  double* gv = buf.slot(v_row);
  for (int i = 0; i < d; ++i) gv[i] += g_pos * fu[i];

  for (int n_row : negative_rows) {
    auto fn = table.row(n_row);
    double g_neg = sigmoid(dot(fu, fn));
    double* gn = buf.slot(n_row);          // may grow the buffer,
    double* gu2 = buf.slot(u_row);         // so fetch the u slot after
    for (int i = 0; i < d; ++i) {
      gu2[i] -= g_neg * fn[i];
      gn[i] -= g_neg * fu[i];
    }
  }

  for (std::size_t s = 0; s < buf.rows.size(); ++s) {
    auto row = table.row(buf.rows[s]);
    const double* g = buf.grads.data() + s * d;
    for (int i = 0; i < d; ++i) row[i] += lr * g[i];
  }
}

void sgns_step(EmbeddingTable& table, const HIN& hin, const EdgeTypeStore::Arc& arc, EdgeTypeId r,
               const NoiseSampler& noise, int negatives, double lr, Rng& rng) {
  auto row_of = [&](NodeId n) {
    int row = table.find(hin.node_name(n));
    if (row < 0) fail("sgns_step: table does not cover node '" + hin.node_name(n) + "'");
    return row;
  };
  thread_local std::vector<int> neg_rows;
  neg_rows.clear();
  NodeTypeId target = hin.node_type(arc.dst);
  for (int k = 0; k < negatives; ++k) neg_rows.push_back(row_of(noise.sample(r, target, rng)));
  sgns_step(table, row_of(arc.src), row_of(arc.dst), neg_rows, lr);
}

EmbeddingTable train_aspect(const HIN& hin, const Aspect& a, const TrainConfig& cfg) {
  cfg.validate();
  for (EdgeTypeId r : a.edge_types) {
    if (r < 0 || r >= hin.num_edge_types())
      fail("train: aspect references unknown edge type id " + std::to_string(r));
    if (hin.edges(r).total_weight <= 0)
      fail("train: edge type '" + hin.schema().edge_types.name(r) + "' has zero total weight");
  }

  // table covers every node whose type is in the aspect, in node id order
  EmbeddingTable table(a.name, cfg.dim);
  std::vector<bool> in_scope(hin.schema().node_types.size(), false);
  for (NodeTypeId t : a.node_types) in_scope[t] = true;
  std::vector<int> node_row(hin.num_nodes(), -1);
  for (NodeId u = 0; u < hin.num_nodes(); ++u)
    if (in_scope[hin.node_type(u)]) node_row[u] = table.add(hin.node_name(u));

  Rng init_rng = make_rng(cfg.seed, 0);
  const double scale = 0.5 / cfg.dim;
  for (double& v : table.data()) v = (uniform01(init_rng) * 2.0 - 1.0) * scale;

  // per-type edge alias tables over arc weights
  std::vector<AliasTable> edge_alias;
  edge_alias.reserve(a.edge_types.size());
  for (EdgeTypeId r : a.edge_types) {
    std::vector<double> w;
    w.reserve(hin.edges(r).arcs.size());
    for (const auto& arc : hin.edges(r).arcs) w.push_back(arc.weight);
    edge_alias.emplace_back(w);
  }
  NoiseSampler noise(hin, a.edge_types, cfg.noise_power);

  const long long total = cfg.samples;
  const double lr_floor = 1e-4;
  std::atomic<long long> done{0};

  auto worker = [&](int w) {
    Rng rng = make_rng(cfg.seed, 1 + static_cast<std::uint64_t>(w));
    long long begin = total * w / cfg.workers;
    long long end = total * (w + 1) / cfg.workers;
    double lr = cfg.initial_lr;
    for (long long it = begin; it < end; ++it) {
      if ((it - begin) % 1000 == 0) {
        long long seen = done.fetch_add(1000, std::memory_order_relaxed);
        lr = cfg.initial_lr *
             std::max(1.0 - static_cast<double>(seen) / static_cast<double>(total), lr_floor);
      }

      std::size_t which = uniform_index(rng, a.edge_types.size());
      EdgeTypeId r = a.edge_types[which];
      const auto& arc = hin.edges(r).arcs[edge_alias[which].sample(rng)];
      thread_local std::vector<int> neg_rows;
      neg_rows.clear();
      NodeTypeId target = hin.node_type(arc.dst);
      for (int k = 0; k < cfg.negatives; ++k)
        neg_rows.push_back(node_row[noise.sample(r, target, rng)]);
      sgns_step(table, node_row[arc.src], node_row[arc.dst], neg_rows, lr);
    }
  };

  if (cfg.workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < cfg.workers; ++w) threads.emplace_back(worker, w);
    for (auto& t : threads) t.join();
  }

  if (!table.all_finite()) fail("train: diverged, table contains non-finite values");
  return table;
}

}  // namespace aspem
