#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aspem/compose.hpp"
#include "aspem/hin.hpp"

namespace aspem {

struct RankedCandidate {
  std::string id;
  int label = 0;
  double score = 0.0;
};

// Candidates sorted by descending score, ties by ascending id.
using RankedResult = std::vector<RankedCandidate>;
RankedResult rank_candidates(std::vector<RankedCandidate> scored);

double precision_at_k(const RankedResult& r, int k);  // k in [1, C]
double recall_at_k(const RankedResult& r, int k);
double accuracy(std::span<const int> pred, std::span<const int> truth);

struct LogRegConfig {
  int epochs = 40;
  double lr = 0.05;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
};

struct LogRegModel {
  std::vector<double> w;
  double bias = 0.0;
};

// Plain SGD with per-epoch seeded shuffling; single-class input yields a
// constant model with a warning.
LogRegModel train_logreg(const std::vector<std::vector<double>>& x, std::span<const int> y,
                         const LogRegConfig& cfg);
double predict_score(const LogRegModel& m, std::span<const double> x);

// One attribute slot of a query: the edge type name it came from, the node
// type of the attributes, and the attribute ids.
struct AttrBlock {
  std::string edge_type;
  std::string attr_type;
  std::vector<std::string> ids;
};

// Per declared slot, the mean edge embedding between the anchor and the
// slot's attributes; empty slots contribute a zero block (with a warning)
// so the feature dimension is constant across queries.
std::vector<double> pair_features(const AspectBundle& bundle, const std::string& anchor,
                                  const std::string& anchor_type,
                                  std::span<const AttrBlock> blocks);

struct LinkPredInstance {
  std::string query;
  std::vector<std::pair<std::string, int>> candidates;  // (id, label), >=1 true
  std::vector<AttrBlock> attrs;                         // fixed declared order
};

// Link-prediction task over one target edge type of an HIN.
struct TaskSpec {
  std::string target_edge;              // edge type to predict
  bool query_is_src = false;            // which endpoint acts as query
  std::vector<std::string> attr_edges;  // feature slots, declared order
  int candidate_count = 100;
  double test_fraction = 0.3;
  std::uint64_t seed = 7;
};

struct InstanceSet {
  std::string anchor_type;  // candidate node type
  std::vector<LinkPredInstance> train;
  std::vector<LinkPredInstance> test;
  std::vector<std::string> train_queries;
  std::vector<std::string> test_queries;
};

// Builds seeded instances from the graph: queries are nodes of the query
// side with at least one target edge; negatives are sampled uniformly from
// the unlinked nodes of the candidate type, one fixed set per query.
InstanceSet make_instances(const HIN& hin, const TaskSpec& task);

struct LinkPredMetrics {
  std::vector<int> ks;
  std::vector<double> precision;  // aligned with ks
  std::vector<double> recall;
  int num_queries = 0;

  double precision_at(int k) const;
  double recall_at(int k) const;
};

// Trains logistic regression on the train instances' pair features and
// ranks the test candidates. Throws on an empty split or on train/test
// query overlap.
LinkPredMetrics linkpred_harness(const AspectBundle& bundle, const std::string& anchor_type,
                                 std::span<const LinkPredInstance> train,
                                 std::span<const LinkPredInstance> test,
                                 const LogRegConfig& logreg, std::span<const int> ks);

// Ranking-only variant with caller-supplied scores, for harness checks.
LinkPredMetrics rank_and_score(std::span<const LinkPredInstance> test,
                               const std::function<double(const LinkPredInstance&,
                                                          const std::string&)>& scorer,
                               std::span<const int> ks);

// One-vs-rest logistic regression over node embeddings; labeled nodes
// missing from the bundle are skipped with a warning.
struct ClassifyResult {
  double acc = 0.0;
  int train_count = 0;
  int test_count = 0;
};
ClassifyResult classify_harness(const AspectBundle& bundle,
                                const std::vector<std::pair<std::string, std::string>>& labeled,
                                double test_fraction, std::uint64_t seed,
                                const LogRegConfig& logreg);

// Instance/attribute/label file readers (formats in the README).
std::vector<LinkPredInstance> read_instances(const std::string& instance_file,
                                             const std::string& attr_file,
                                             const HIN* hin_for_types);
std::vector<std::pair<std::string, std::string>> read_labels(const std::string& path);

}  // namespace aspem
