#include "aspem/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "aspem/rng.hpp"

namespace aspem {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

RankedResult rank_candidates(std::vector<RankedCandidate> scored) {
  std::sort(scored.begin(), scored.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return scored;
}

double precision_at_k(const RankedResult& r, int k) {
  if (k < 1 || k > static_cast<int>(r.size()))
    fail("precision_at_k: k=" + std::to_string(k) + " out of range [1, " +
         std::to_string(r.size()) + "]");
  int hits = 0;
  for (int i = 0; i < k; ++i) hits += r[i].label != 0;
  return static_cast<double>(hits) / k;
}

double recall_at_k(const RankedResult& r, int k) {
  if (k < 1 || k > static_cast<int>(r.size()))
    fail("recall_at_k: k=" + std::to_string(k) + " out of range [1, " + std::to_string(r.size()) +
         "]");
  int hits = 0, total = 0;
  for (int i = 0; i < static_cast<int>(r.size()); ++i) {
    total += r[i].label != 0;
    if (i < k) hits += r[i].label != 0;
  }
  if (total == 0) fail("recall_at_k: candidate set has no true instance");
  return static_cast<double>(hits) / total;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) fail("accuracy: prediction/truth length mismatch");
  if (pred.empty()) fail("accuracy: empty input");
  int hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

LogRegModel train_logreg(const std::vector<std::vector<double>>& x, std::span<const int> y,
                         const LogRegConfig& cfg) {
  if (x.empty() || x.size() != y.size()) fail("train_logreg: empty or mismatched inputs");
  const std::size_t dim = x[0].size();
  for (const auto& row : x)
    if (row.size() != dim) fail("train_logreg: inconsistent feature dimensions");

  bool has_pos = false, has_neg = false;
  for (int label : y) (label ? has_pos : has_neg) = true;
  LogRegModel model;
  model.w.assign(dim, 0.0);
  if (!has_pos || !has_neg) {
    std::cerr << "warning: logistic regression input is single-class, returning constant model\n";
    model.bias = has_pos ? 10.0 : -10.0;
    return model;
  }

  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = make_rng(cfg.seed, 0x10);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with our own uniform so runs are reproducible
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    for (std::size_t idx : order) {
      const auto& row = x[idx];
      double z = model.bias;
      for (std::size_t j = 0; j < dim; ++j) z += model.w[j] * row[j];
      double err = static_cast<double>(y[idx] != 0) - sigmoid(z);
      for (std::size_t j = 0; j < dim; ++j)
        model.w[j] += cfg.lr * (err * row[j] - cfg.l2 * model.w[j]);
      model.bias += cfg.lr * err;
    }
  }
  return model;
}

double predict_score(const LogRegModel& m, std::span<const double> x) {
  if (x.size() != m.w.size()) fail("predict_score: feature dimension mismatch");
  double z = m.bias;
  for (std::size_t j = 0; j < x.size(); ++j) z += m.w[j] * x[j];
  return sigmoid(z);
}

std::vector<double> pair_features(const AspectBundle& bundle, const std::string& anchor,
                                  const std::string& anchor_type,
                                  std::span<const AttrBlock> blocks) {
  std::vector<double> out;
  for (const AttrBlock& block : blocks) {
    int dim = pair_block_dim(bundle, anchor_type, block.attr_type);
    if (block.ids.empty()) {
      std::cerr << "warning: no '" << block.edge_type << "' attributes for this query, block of "
                << dim << " zeros\n";
      out.insert(out.end(), dim, 0.0);
      continue;
    }
    std::vector<double> mean(dim, 0.0);
    for (const std::string& attr : block.ids) {
      std::vector<double> e = edge_embedding(bundle, anchor, attr);
      if (static_cast<int>(e.size()) != dim)
        fail("pair_features: attribute '" + attr + "' yields a " + std::to_string(e.size()) +
             "-dim edge embedding, expected " + std::to_string(dim));
      for (int j = 0; j < dim; ++j) mean[j] += e[j];
    }
    for (double& v : mean) v /= static_cast<double>(block.ids.size());
    out.insert(out.end(), mean.begin(), mean.end());
  }
  return out;
}

InstanceSet make_instances(const HIN& hin, const TaskSpec& task) {
  const SchemaGraph& schema = hin.schema();
  EdgeTypeId target = schema.edge_types.find(task.target_edge);
  if (target < 0) fail("make_instances: unknown edge type '" + task.target_edge + "'");
  const SchemaEdge& decl = schema.edge(target);
  NodeTypeId query_type = task.query_is_src ? decl.src_type : decl.dst_type;
  NodeTypeId cand_type = task.query_is_src ? decl.dst_type : decl.src_type;
  if (query_type == cand_type)
    fail("make_instances: target edge type joins a node type with itself");

  std::vector<EdgeTypeId> attr_edges;
  for (const std::string& name : task.attr_edges) {
    EdgeTypeId r = schema.edge_types.find(name);
    if (r < 0) fail("make_instances: unknown attribute edge type '" + name + "'");
    attr_edges.push_back(r);
  }

  // neighbors of q under r, on whichever side matches q's type
  auto neighbors = [&](NodeId q, EdgeTypeId r) {
    std::set<NodeId> out;
    const SchemaEdge& e = schema.edge(r);
    if (e.src_type == hin.node_type(q))
      for (const auto& a : hin.edges(r).out_arcs(q)) out.insert(a.dst);
    if (e.dst_type == hin.node_type(q))
      for (const auto& a : hin.edges(r).in_arcs(q)) out.insert(a.node);
    return out;
  };

  std::vector<NodeId> queries;
  for (NodeId q : hin.nodes_of_type(query_type))
    if (!neighbors(q, target).empty()) queries.push_back(q);
  if (queries.empty()) fail("make_instances: no query node has a '" + task.target_edge + "' edge");

  Rng rng = make_rng(task.seed, 0x20);
  for (std::size_t i = queries.size(); i > 1; --i)
    std::swap(queries[i - 1], queries[uniform_index(rng, i)]);
  std::size_t test_count =
      static_cast<std::size_t>(std::llround(task.test_fraction * static_cast<double>(queries.size())));
  if (task.test_fraction > 0 && test_count == 0) test_count = 1;
  if (test_count > queries.size()) test_count = queries.size();

  const std::vector<NodeId>& cand_nodes = hin.nodes_of_type(cand_type);
  InstanceSet out;
  out.anchor_type = schema.node_types.name(cand_type);

  auto build = [&](NodeId q) {
    LinkPredInstance inst;
    inst.query = hin.node_name(q);
    std::set<NodeId> truth = neighbors(q, target);
    for (NodeId v : truth) inst.candidates.emplace_back(hin.node_name(v), 1);
    // fixed seeded negative set per query, shared by every compared method
    Rng qrng = make_rng(task.seed, 0x30 + static_cast<std::uint64_t>(q));
    std::unordered_set<NodeId> used(truth.begin(), truth.end());
    int want = std::max<int>(task.candidate_count, static_cast<int>(truth.size()));
    int guard = 50 * want + 100;
    while (static_cast<int>(inst.candidates.size()) < want && guard-- > 0) {
      NodeId v = cand_nodes[uniform_index(qrng, cand_nodes.size())];
      if (used.count(v)) continue;
      used.insert(v);
      inst.candidates.emplace_back(hin.node_name(v), 0);
    }
    for (EdgeTypeId r : attr_edges) {
      AttrBlock block;
      block.edge_type = schema.edge_types.name(r);
      const SchemaEdge& e = schema.edge(r);
      NodeTypeId at = e.src_type == query_type ? e.dst_type : e.src_type;
      block.attr_type = schema.node_types.name(at);
      for (NodeId v : neighbors(q, r)) block.ids.push_back(hin.node_name(v));
      inst.attrs.push_back(std::move(block));
    }
    return inst;
  };

  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (i < test_count) {
      out.test.push_back(build(queries[i]));
      out.test_queries.push_back(hin.node_name(queries[i]));
    } else {
      out.train.push_back(build(queries[i]));
      out.train_queries.push_back(hin.node_name(queries[i]));
    }
  }
  return out;
}

double LinkPredMetrics::precision_at(int k) const {
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks[i] == k) return precision[i];
  fail("metrics: no P@" + std::to_string(k));
}

double LinkPredMetrics::recall_at(int k) const {
  for (std::size_t i = 0; i < ks.size(); ++i)
    if (ks[i] == k) return recall[i];
  fail("metrics: no R@" + std::to_string(k));
}

LinkPredMetrics rank_and_score(std::span<const LinkPredInstance> test,
                               const std::function<double(const LinkPredInstance&,
                                                          const std::string&)>& scorer,
                               std::span<const int> ks) {
  if (test.empty()) fail("linkpred: empty test split");
  LinkPredMetrics m;
  m.ks.assign(ks.begin(), ks.end());
  m.precision.assign(ks.size(), 0.0);
  m.recall.assign(ks.size(), 0.0);
  for (const LinkPredInstance& inst : test) {
    std::vector<RankedCandidate> scored;
    scored.reserve(inst.candidates.size());
    for (const auto& [id, label] : inst.candidates) scored.push_back({id, label, scorer(inst, id)});
    RankedResult ranked = rank_candidates(std::move(scored));
    for (std::size_t i = 0; i < m.ks.size(); ++i) {
      int k = std::min<int>(m.ks[i], static_cast<int>(ranked.size()));
      m.precision[i] += precision_at_k(ranked, k);
      m.recall[i] += recall_at_k(ranked, k);
    }
  }
  for (std::size_t i = 0; i < m.ks.size(); ++i) {
    m.precision[i] /= static_cast<double>(test.size());
    m.recall[i] /= static_cast<double>(test.size());
  }
  m.num_queries = static_cast<int>(test.size());
  return m;
}

LinkPredMetrics linkpred_harness(const AspectBundle& bundle, const std::string& anchor_type,
                                 std::span<const LinkPredInstance> train,
                                 std::span<const LinkPredInstance> test,
                                 const LogRegConfig& logreg, std::span<const int> ks) {
  if (train.empty() || test.empty()) fail("linkpred: empty train or test split");
  std::set<std::string> train_q;
  for (const auto& inst : train) train_q.insert(inst.query);
  for (const auto& inst : test)
    if (train_q.count(inst.query))
      fail("linkpred: query '" + inst.query + "' appears in both train and test");

  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (const LinkPredInstance& inst : train) {
    for (const auto& [cand, label] : inst.candidates) {
      x.push_back(pair_features(bundle, cand, anchor_type, inst.attrs));
      y.push_back(label);
    }
  }
  LogRegModel model = train_logreg(x, y, logreg);

  return rank_and_score(
      test,
      [&](const LinkPredInstance& inst, const std::string& cand) {
        return predict_score(model, pair_features(bundle, cand, anchor_type, inst.attrs));
      },
      ks);
}

ClassifyResult classify_harness(const AspectBundle& bundle,
                                const std::vector<std::pair<std::string, std::string>>& labeled,
                                double test_fraction, std::uint64_t seed,
                                const LogRegConfig& logreg) {
  std::vector<std::pair<std::string, int>> usable;  // (node, class index)
  std::vector<std::string> classes;
  for (const auto& [node, cls] : labeled) {
    bool found = false;
    for (const BundleEntry& e : bundle.entries) found = found || e.table.find(node) >= 0;
    if (!found) {
      std::cerr << "warning: labeled node '" << node << "' missing from bundle, skipped\n";
      continue;
    }
    auto it = std::find(classes.begin(), classes.end(), cls);
    int idx = static_cast<int>(it - classes.begin());
    if (it == classes.end()) classes.push_back(cls);
    usable.emplace_back(node, idx);
  }
  if (usable.size() < 2) fail("classify: need at least two labeled nodes covered by the bundle");

  Rng rng = make_rng(seed, 0x40);
  for (std::size_t i = usable.size(); i > 1; --i)
    std::swap(usable[i - 1], usable[uniform_index(rng, i)]);
  std::size_t test_count =
      static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(usable.size())));
  if (test_count == 0) test_count = 1;
  if (test_count >= usable.size()) test_count = usable.size() - 1;

  std::vector<std::vector<double>> train_x, test_x;
  std::vector<int> train_y, test_y;
  for (std::size_t i = 0; i < usable.size(); ++i) {
    auto feat = node_embedding(bundle, usable[i].first);
    if (i < test_count) {
      test_x.push_back(std::move(feat));
      test_y.push_back(usable[i].second);
    } else {
      train_x.push_back(std::move(feat));
      train_y.push_back(usable[i].second);
    }
  }

  // one-vs-rest, predict the argmax score
  std::vector<LogRegModel> models;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<int> yc(train_y.size());
    for (std::size_t i = 0; i < train_y.size(); ++i) yc[i] = train_y[i] == static_cast<int>(c);
    models.push_back(train_logreg(train_x, yc, logreg));
  }
  std::vector<int> pred(test_y.size());
  for (std::size_t i = 0; i < test_x.size(); ++i) {
    int best = 0;
    double best_score = -1;
    for (std::size_t c = 0; c < models.size(); ++c) {
      double s = predict_score(models[c], test_x[i]);
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(c);
      }
    }
    pred[i] = best;
  }
  return {accuracy(pred, test_y), static_cast<int>(train_y.size()),
          static_cast<int>(test_y.size())};
}

std::vector<LinkPredInstance> read_instances(const std::string& instance_file,
                                             const std::string& attr_file,
                                             const HIN* hin_for_types) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<LinkPredInstance> out;

  std::ifstream in(instance_file);
  if (!in) fail("cannot open instance file '" + instance_file + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string q, cand, label;
    if (!std::getline(ss, q, '\t') || !std::getline(ss, cand, '\t') || !std::getline(ss, label))
      fail(instance_file + ":" + std::to_string(lineno) + ": expected '<query>\\t<cand>\\t<0|1>'");
    if (label != "0" && label != "1")
      fail(instance_file + ":" + std::to_string(lineno) + ": label must be 0 or 1, got '" + label +
           "'");
    auto [it, fresh] = index.try_emplace(q, out.size());
    if (fresh) {
      out.emplace_back();
      out.back().query = q;
    }
    out[it->second].candidates.emplace_back(cand, label == "1" ? 1 : 0);
  }

  if (!attr_file.empty()) {
    std::ifstream attrs(attr_file);
    if (!attrs) fail("cannot open attribute file '" + attr_file + "'");
    lineno = 0;
    while (std::getline(attrs, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      std::string q, etype, attr;
      if (!std::getline(ss, q, '\t') || !std::getline(ss, etype, '\t') || !std::getline(ss, attr))
        fail(attr_file + ":" + std::to_string(lineno) + ": expected '<query>\\t<edge_type>\\t<attr>'");
      auto it = index.find(q);
      if (it == index.end())
        fail(attr_file + ":" + std::to_string(lineno) + ": unknown query '" + q + "'");
      LinkPredInstance& inst = out[it->second];
      AttrBlock* block = nullptr;
      for (auto& b : inst.attrs)
        if (b.edge_type == etype) block = &b;
      if (!block) {
        inst.attrs.push_back({etype, "", {}});
        block = &inst.attrs.back();
        if (hin_for_types) {
          NodeId n = hin_for_types->find_node(attr);
          if (n != kNoNode)
            block->attr_type =
                hin_for_types->schema().node_types.name(hin_for_types->node_type(n));
        }
      }
      block->ids.push_back(attr);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open labels file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
      fail(path + ":" + std::to_string(lineno) + ": expected '<node_id>\\t<class>'");
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

}  // namespace aspem
