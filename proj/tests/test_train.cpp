#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "aspem/train.hpp"
#include "test_util.hpp"

using namespace aspem;

namespace {

// A->P star with three papers; uniform candidates make the exact objective
// analytic at the zero table.
HIN star_graph() {
  HINBuilder b;
  NodeTypeId a = b.add_node_type("A");
  NodeTypeId p = b.add_node_type("P");
  EdgeTypeId r = b.add_edge_type("write", a, p, false);
  b.add_node("a1", a);
  b.add_node("a2", a);
  for (int i = 0; i < 3; ++i) b.add_node("p" + std::to_string(i), p);
  b.add_edge("a1", "p0", r, 2.0);
  b.add_edge("a1", "p1", r, 6.0);
  b.add_edge("a2", "p2", r, 1.0);
  return b.build();
}

// small two-type graph with enough structure for training checks
HIN toy_graph() {
  HINBuilder b;
  NodeTypeId u = b.add_node_type("U");
  NodeTypeId m = b.add_node_type("M");
  EdgeTypeId r = b.add_edge_type("review", u, m, true);
  for (int i = 0; i < 4; ++i) b.add_node("u" + std::to_string(i), u);
  for (int i = 0; i < 6; ++i) b.add_node("m" + std::to_string(i), m);
  const int adj[4][3] = {{0, 1, 2}, {0, 1, 3}, {3, 4, 5}, {2, 4, 5}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j)
      b.add_edge("u" + std::to_string(i), "m" + std::to_string(adj[i][j]), r, 1.0 + j);
  return b.build();
}

EmbeddingTable table_over(const HIN& hin, const Aspect& a, int dim, std::uint64_t seed,
                          std::vector<int>* node_row = nullptr) {
  EmbeddingTable t(a.name, dim);
  std::vector<bool> in_scope(hin.schema().node_types.size(), false);
  for (NodeTypeId x : a.node_types) in_scope[x] = true;
  if (node_row) node_row->assign(hin.num_nodes(), -1);
  for (NodeId u = 0; u < hin.num_nodes(); ++u)
    if (in_scope[hin.node_type(u)]) {
      int row = t.add(hin.node_name(u));
      if (node_row) (*node_row)[u] = row;
    }
  Rng rng = make_rng(seed, 99);
  for (double& v : t.data()) v = (uniform01(rng) * 2.0 - 1.0) * (0.5 / dim);
  return t;
}

// straight double-loop evaluation of the aspect objective
double brute_objective(const HIN& hin, const EmbeddingTable& t, const Aspect& a) {
  double total = 0.0;
  for (EdgeTypeId r : a.edge_types) {
    const auto& store = hin.edges(r);
    double sum = 0.0;
    for (const auto& arc : store.arcs) {
      auto fu = t.row(t.find(hin.node_name(arc.src)));
      double denom = 0.0, target = 0.0;
      for (NodeId v : hin.nodes_of_type(hin.node_type(arc.dst))) {
        auto fv = t.row(t.find(hin.node_name(v)));
        double d = 0.0;
        for (std::size_t k = 0; k < fu.size(); ++k) d += fu[k] * fv[k];
        denom += std::exp(d);
        if (v == arc.dst) target = std::exp(d);
      }
      sum += arc.weight * std::log(target / denom);
    }
    total -= sum / store.total_weight;
  }
  return total;
}

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// the per-iteration ascent objective with fixed negatives
double sgns_value(const EmbeddingTable& t, int u, int v, const std::vector<int>& negs) {
  auto dot = [&](int i, int j) {
    auto a = t.row(i);
    auto b = t.row(j);
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
  };
  double val = std::log(sigmoid_ref(dot(u, v)));
  for (int n : negs) val += std::log(sigmoid_ref(-dot(u, n)));
  return val;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("softmax: uniform over two, single candidate, hand value") {
  EmbeddingTable t("X", 2);
  int a = t.add("a"), b = t.add("b"), c = t.add("c");
  std::vector<int> two{b, c};
  CHECK(softmax_prob(t, a, b, two) == doctest::Approx(0.5).epsilon(1e-12));
  std::vector<int> one{b};
  CHECK(softmax_prob(t, a, b, one) == doctest::Approx(1.0).epsilon(1e-12));

  t.row(a)[0] = 1.0;
  t.row(b)[0] = 1.0;
  t.row(c)[0] = -1.0;
  double e = std::exp(1.0), einv = std::exp(-1.0);
  CHECK(softmax_prob(t, a, b, two) == doctest::Approx(e / (e + einv)).epsilon(1e-12));

  CHECK_THROWS(softmax_prob(t, a, b, std::vector<int>{c}));  // v not a candidate
  CHECK_THROWS(softmax_prob(t, a, b, std::vector<int>{}));
}

TEST_CASE("softmax sums to one over candidates for random tables") {
  Rng rng = make_rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    int dim = 1 + static_cast<int>(uniform_index(rng, 16));
    int n = 2 + static_cast<int>(uniform_index(rng, 30));
    EmbeddingTable t("X", dim);
    std::vector<int> rows;
    for (int i = 0; i < n; ++i) {
      rows.push_back(t.add("n" + std::to_string(i)));
      for (double& v : t.row(rows.back())) v = uniform01(rng) * 10.0 - 5.0;
    }
    double sum = 0.0;
    for (int v : rows) sum += softmax_prob(t, rows[0], v, rows);
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("empirical probability is the weight share") {
  HIN hin = star_graph();
  EdgeTypeId r = 0;
  NodeId a1 = hin.find_node("a1");
  CHECK(empirical_prob(hin, a1, hin.find_node("p0"), r) == doctest::Approx(0.25));
  CHECK(empirical_prob(hin, a1, hin.find_node("p2"), r) == 0.0);
  double sum = 0.0;
  for (NodeId v : hin.nodes_of_type(hin.node_type(hin.find_node("p0"))))
    sum += empirical_prob(hin, a1, v, r);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS(empirical_prob(hin, hin.find_node("p0"), a1, r));  // zero out-degree
}

TEST_CASE("objective at the zero table is log of the candidate count") {
  HIN hin = star_graph();
  Aspect a = Aspect::from_edge_types(hin.schema(), {0});
  EmbeddingTable t("AP", 4);
  for (NodeId u = 0; u < hin.num_nodes(); ++u) t.add(hin.node_name(u));
  CHECK(objective(hin, t, a) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("objective matches the double-loop oracle on random tables") {
  HIN hin = toy_graph();
  Aspect a = Aspect::from_edge_types(hin.schema(), {0});
  Rng rng = make_rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    EmbeddingTable t = table_over(hin, a, 5, 100 + trial);
    for (double& v : t.data()) v = uniform01(rng) * 2.0 - 1.0;
    CHECK(objective(hin, t, a) == doctest::Approx(brute_objective(hin, t, a)).epsilon(1e-12));
  }
  CHECK_THROWS(objective(hin, EmbeddingTable("E", 5), Aspect{}));
}

TEST_CASE("kl-weighted form equals objective minus empirical entropy") {
  HIN hin = toy_graph();
  Aspect a = Aspect::from_edge_types(hin.schema(), {0});
  EmbeddingTable t = table_over(hin, a, 6, 7);
  for (double& v : t.data()) v = v * 10.0;  // spread out so the terms are nontrivial

  double kl_sum = 0.0, entropy = 0.0;
  for (EdgeTypeId r : a.edge_types) {
    const auto& store = hin.edges(r);
    for (NodeId u = 0; u < hin.num_nodes(); ++u) {
      if (store.out_degree[u] <= 0) continue;
      double lambda = store.out_degree[u] / store.total_weight;
      const auto& cands = hin.nodes_of_type(hin.node_type(store.out_arcs(u)[0].dst));
      std::vector<int> rows;
      for (NodeId v : cands) rows.push_back(t.find(hin.node_name(v)));
      double kl = 0.0, h = 0.0;
      for (const auto& arc : store.out_arcs(u)) {
        double p_hat = empirical_prob(hin, u, arc.dst, r);
        double p = softmax_prob(t, t.find(hin.node_name(u)), t.find(hin.node_name(arc.dst)), rows);
        kl += p_hat * std::log(p_hat / p);
        h -= p_hat * std::log(p_hat);
      }
      kl_sum += lambda * kl;
      entropy += lambda * h;
    }
  }
  CHECK(kl_sum == doctest::Approx(objective(hin, t, a) - entropy).epsilon(1e-9));
}

TEST_CASE("sgns fixed point at the origin and ascent for K=0") {
  EmbeddingTable t("X", 3);
  int u = t.add("u"), v = t.add("v");
  sgns_step(t, u, v, {}, 0.5);
  for (double x : t.data()) CHECK(x == 0.0);

  Rng rng = make_rng(3);
  for (double& x : t.data()) x = uniform01(rng) - 0.5;
  auto dot_uv = [&] {
    double s = 0;
    for (int k = 0; k < 3; ++k) s += t.row(u)[k] * t.row(v)[k];
    return s;
  };
  double before = dot_uv();
  sgns_step(t, u, v, {}, 0.01);
  CHECK(dot_uv() > before);
}

TEST_CASE("sgns with zero learning rate is the identity") {
  Rng rng = make_rng(8);
  EmbeddingTable t("X", 4);
  std::vector<int> rows;
  for (int i = 0; i < 6; ++i) {
    rows.push_back(t.add("n" + std::to_string(i)));
    for (double& v : t.row(rows.back())) v = uniform01(rng) - 0.5;
  }
  std::vector<double> before = t.data();
  std::vector<int> negs{rows[2], rows[3], rows[2]};
  sgns_step(t, rows[0], rows[1], negs, 0.0);
  CHECK(t.data() == before);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng = make_rng(1234);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    int dim = 1 + static_cast<int>(uniform_index(rng, 8));
    int k = static_cast<int>(uniform_index(rng, 6));
    int n = 3 + static_cast<int>(uniform_index(rng, 5));
    EmbeddingTable t("X", dim);
    for (int i = 0; i < n; ++i) {
      t.add("n" + std::to_string(i));
      for (double& v : t.row(i)) v = uniform01(rng) * 2.0 - 1.0;
    }
    int u = static_cast<int>(uniform_index(rng, n));
    int v = static_cast<int>(uniform_index(rng, n));
    std::vector<int> negs;
    for (int i = 0; i < k; ++i) negs.push_back(static_cast<int>(uniform_index(rng, n)));

    // analytic gradient: one unit-lr step from a copy
    EmbeddingTable stepped = t;
    sgns_step(stepped, u, v, negs, 1.0);

    for (int row = 0; row < n; ++row) {
      for (int j = 0; j < dim; ++j) {
        double analytic = stepped.row(row)[j] - t.row(row)[j];
        EmbeddingTable plus = t, minus = t;
        plus.row(row)[j] += h;
        minus.row(row)[j] -= h;
        double fd = (sgns_value(plus, u, v, negs) - sgns_value(minus, u, v, negs)) / (2 * h);
        double scale = std::abs(analytic) + std::abs(fd);
        if (scale < 1e-8)
          CHECK(std::abs(analytic - fd) < 1e-8);
        else
          CHECK(std::abs(analytic - fd) / scale < 1e-4);
      }
    }
  }
}

TEST_CASE("noise weights are exact 3/4 powers of in-degree") {
  HINBuilder b;
  NodeTypeId a = b.add_node_type("A");
  NodeTypeId p = b.add_node_type("P");
  EdgeTypeId r = b.add_edge_type("write", a, p, false);
  b.add_node("a1", a);
  b.add_node("v1", p);
  b.add_node("v2", p);
  b.add_edge("a1", "v1", r, 16.0);
  b.add_edge("a1", "v2", r, 81.0);
  HIN hin = b.build();
  std::vector<EdgeTypeId> edges{r};
  NoiseSampler noise(hin, edges, 0.75);
  auto w = noise.weights(r, p);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(27.0).epsilon(1e-12));

  Rng rng = make_rng(55);
  long long draws = 200'000, c1 = 0;
  for (long long i = 0; i < draws; ++i) c1 += noise.sample(r, p, rng) == hin.find_node("v1");
  double prob = 8.0 / 35.0;
  double sigma = std::sqrt(prob * (1 - prob) * static_cast<double>(draws));
  CHECK(std::abs(c1 - draws * prob) < 3 * sigma);
}

TEST_CASE("single-support noise always returns that node") {
  HINBuilder b;
  NodeTypeId a = b.add_node_type("A");
  NodeTypeId p = b.add_node_type("P");
  EdgeTypeId r = b.add_edge_type("write", a, p, false);
  b.add_node("a1", a);
  b.add_node("v1", p);
  b.add_node("v2", p);  // no in-edges, stays out of the support
  b.add_edge("a1", "v1", r, 3.0);
  HIN hin = b.build();
  std::vector<EdgeTypeId> edges{r};
  NoiseSampler noise(hin, edges, 0.75);
  Rng rng = make_rng(66);
  for (int i = 0; i < 1000; ++i) CHECK(noise.sample(r, p, rng) == hin.find_node("v1"));
}

TEST_CASE("empty noise support is an error") {
  HINBuilder b;
  NodeTypeId a = b.add_node_type("A");
  NodeTypeId p = b.add_node_type("P");
  EdgeTypeId r = b.add_edge_type("write", a, p, false);
  b.add_node("a1", a);
  b.add_node("p1", p);
  HIN hin = b.build();  // no edges at all
  std::vector<EdgeTypeId> edges{r};
  NoiseSampler noise(hin, edges, 0.75);
  Rng rng = make_rng(1);
  CHECK_THROWS(noise.sample(r, p, rng));
}

TEST_CASE("noise frequencies pass a chi-square test on random degrees") {
  Rng rng = make_rng(77);
  HINBuilder b;
  NodeTypeId a = b.add_node_type("A");
  NodeTypeId p = b.add_node_type("P");
  EdgeTypeId r = b.add_edge_type("write", a, p, false);
  b.add_node("a1", a);
  const int n = 12;
  std::vector<double> degree(n);
  for (int i = 0; i < n; ++i) {
    b.add_node("v" + std::to_string(i), p);
    degree[i] = 1.0 + 30.0 * uniform01(rng);
    b.add_edge("a1", "v" + std::to_string(i), r, degree[i]);
  }
  HIN hin = b.build();
  std::vector<EdgeTypeId> edges{r};
  NoiseSampler noise(hin, edges, 0.75);

  const long long draws = 1'000'000;
  std::vector<long long> counts(n, 0);
  for (long long i = 0; i < draws; ++i)
    counts[noise.sample(r, p, rng) - hin.find_node("v0")]++;
  double sum = 0;
  std::vector<double> probs(n);
  for (int i = 0; i < n; ++i) sum += std::pow(degree[i], 0.75);
  for (int i = 0; i < n; ++i) probs[i] = std::pow(degree[i], 0.75) / sum;
  CHECK(testutil::chi2_gof_ok(counts, probs, draws));
}

TEST_CASE("negatives always match the sampled arc's destination type") {
  HIN hin = toy_graph();  // undirected review type: arcs point both ways
  std::vector<EdgeTypeId> edges{0};
  NoiseSampler noise(hin, edges, 0.75);
  Rng rng = make_rng(12);
  for (const auto& arc : hin.edges(0).arcs) {
    NodeTypeId want = hin.node_type(arc.dst);
    for (int i = 0; i < 20; ++i) CHECK(hin.node_type(noise.sample(0, want, rng)) == want);
  }
}

TEST_CASE("single-worker training is bit-reproducible") {
  HIN hin = toy_graph();
  Aspect a = Aspect::from_edge_types(hin.schema(), {0});
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.samples = 20'000;
  cfg.negatives = 3;
  cfg.seed = 99;
  EmbeddingTable t1 = train_aspect(hin, a, cfg);
  EmbeddingTable t2 = train_aspect(hin, a, cfg);
  REQUIRE(t1.data().size() == t2.data().size());
  CHECK(std::memcmp(t1.data().data(), t2.data().data(), t1.data().size() * sizeof(double)) == 0);

  cfg.seed = 100;
  EmbeddingTable t3 = train_aspect(hin, a, cfg);
  CHECK(std::memcmp(t1.data().data(), t3.data().data(), t1.data().size() * sizeof(double)) != 0);
}

TEST_CASE("exact objective decreases over training checkpoints") {
  // clustered bipartite graph large enough that descent spans every chunk
  Rng gen = make_rng(4, 7);
  HINBuilder b;
  NodeTypeId ut = b.add_node_type("U");
  NodeTypeId mt = b.add_node_type("M");
  EdgeTypeId r = b.add_edge_type("review", ut, mt, true);
  const int nu = 20, nm = 40;
  for (int i = 0; i < nu; ++i) b.add_node("u" + std::to_string(i), ut);
  for (int i = 0; i < nm; ++i) b.add_node("m" + std::to_string(i), mt);
  for (int i = 0; i < nu; ++i)
    for (int k = 0; k < 12; ++k) {
      int m_id = (static_cast<int>(uniform_index(gen, nm / 4)) * 4 + i % 4) % nm;
      b.add_edge("u" + std::to_string(i), "m" + std::to_string(m_id), r,
                 1.0 + static_cast<double>(uniform_index(gen, 3)));
    }
  HIN hin = b.build();

  Aspect a = Aspect::from_edge_types(hin.schema(), {0});
  EmbeddingTable t = table_over(hin, a, 8, 4);
  std::vector<double> edge_w;
  for (const auto& arc : hin.edges(0).arcs) edge_w.push_back(arc.weight);
  AliasTable edges(edge_w);
  std::vector<EdgeTypeId> types{0};
  NoiseSampler noise(hin, types, 0.75);
  Rng rng = make_rng(4, 1);

  double prev = objective(hin, t, a);
  const long long chunk = 10'000;
  const int n_chunks = 5;
  for (int checkpoint = 0; checkpoint < n_chunks; ++checkpoint) {
    for (long long i = 0; i < chunk; ++i) {
      const auto& arc = hin.edges(0).arcs[edges.sample(rng)];
      double lr = 0.025 * std::max(1.0 - static_cast<double>(checkpoint * chunk + i) /
                                             static_cast<double>(n_chunks * chunk),
                                   1e-4);
      sgns_step(t, hin, arc, 0, noise, 5, lr, rng);
    }
    double now = objective(hin, t, a);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("training lowers the exact objective on the toy graph") {
  HIN hin = toy_graph();
  Aspect a = Aspect::from_edge_types(hin.schema(), {0});
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.samples = 50'000;
  cfg.seed = 5;
  EmbeddingTable trained = train_aspect(hin, a, cfg);
  EmbeddingTable init = table_over(hin, a, cfg.dim, 5);
  // the baseline is a fresh random init at the same scale
  CHECK(objective(hin, trained, a) < objective(hin, init, a));
}

TEST_CASE("planted two-block graph separates after training") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    HINBuilder b;
    NodeTypeId x = b.add_node_type("X");
    NodeTypeId y = b.add_node_type("Y");
    EdgeTypeId r = b.add_edge_type("link", x, y, true);
    const int half = 5;
    for (int i = 0; i < 2 * half; ++i) {
      b.add_node("x" + std::to_string(i), x);
      b.add_node("y" + std::to_string(i), y);
    }
    for (int i = 0; i < 2 * half; ++i)
      for (int j = 0; j < 2 * half; ++j)
        if ((i < half) == (j < half)) b.add_edge("x" + std::to_string(i), "y" + std::to_string(j), r, 1.0);
    HIN hin = b.build();
    Aspect a = Aspect::from_edge_types(hin.schema(), {r});
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.samples = 1'000'000;
    cfg.seed = seed;
    EmbeddingTable t = train_aspect(hin, a, cfg);

    double intra = 0, inter = 0;
    int n_intra = 0, n_inter = 0;
    for (int i = 0; i < 2 * half; ++i)
      for (int j = 0; j < 2 * half; ++j) {
        auto fx = t.row(t.find("x" + std::to_string(i)));
        auto fy = t.row(t.find("y" + std::to_string(j)));
        double d = 0;
        for (int k = 0; k < cfg.dim; ++k) d += fx[k] * fy[k];
        if ((i < half) == (j < half)) {
          intra += d;
          ++n_intra;
        } else {
          inter += d;
          ++n_inter;
        }
      }
    CHECK(intra / n_intra > inter / n_inter);
  }
}

TEST_CASE("table covers every in-scope node, isolated ones keep their init") {
  HINBuilder b;
  NodeTypeId u = b.add_node_type("U");
  NodeTypeId m = b.add_node_type("M");
  EdgeTypeId r = b.add_edge_type("review", u, m, true);
  b.add_node("u0", u);
  b.add_node("u1", u);
  b.add_node("u_isolated", u);
  b.add_node("m0", m);
  b.add_edge("u0", "m0", r, 1.0);
  b.add_edge("u1", "m0", r, 1.0);
  HIN hin = b.build();
  Aspect a = Aspect::from_edge_types(hin.schema(), {r});
  TrainConfig cfg;
  cfg.dim = 4;
  cfg.samples = 5'000;
  cfg.seed = 2;
  EmbeddingTable t = train_aspect(hin, a, cfg);
  CHECK(t.size() == 4);
  CHECK(t.all_finite());
  int iso = t.find("u_isolated");
  REQUIRE(iso >= 0);
  for (double v : t.row(iso)) {
    CHECK(std::abs(v) <= 0.5 / cfg.dim);  // untouched initialization scale
    CHECK(v != 0.0);
  }
}

TEST_CASE("training an aspect with a zero-weight edge type fails") {
  HINBuilder b;
  NodeTypeId u = b.add_node_type("U");
  NodeTypeId m = b.add_node_type("M");
  EdgeTypeId r = b.add_edge_type("review", u, m, true);
  b.add_node("u0", u);
  b.add_node("m0", m);
  HIN hin = b.build();  // declared but empty edge type
  std::vector<EdgeTypeId> edges{r};
  SchemaGraph schema = hin.schema();
  Aspect a;
  a.name = "UM";
  a.edge_types = edges;
  a.node_types = {u, m};
  TrainConfig cfg;
  cfg.samples = 10;
  CHECK_THROWS_WITH_AS(train_aspect(hin, a, cfg), doctest::Contains("zero total weight"),
                       std::runtime_error);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.dim = 0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.negatives = -1;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.samples = 0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.initial_lr = 0;
  CHECK_THROWS(cfg.validate());
}

}  // TEST_SUITE
