#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aspem/compose.hpp"
#include "aspem/eval.hpp"
#include "aspem/hin.hpp"
#include "aspem/selection.hpp"
#include "aspem/train.hpp"

namespace aspem {

inline constexpr const char* kVersion = "0.1.0";

// Flat key=value configuration; every key can be overridden on the command
// line. Unknown keys are rejected so typos surface early.
struct PipelineConfig {
  std::string nodes_path;
  std::string edges_path;
  std::string scores_path;  // optional: load instead of computing
  std::string out_dir = "aspem_out";
  std::vector<std::string> anchors;
  double theta = -1.0;  // <0 means auto-threshold
  TrainConfig train;
  bool binary_embeddings = false;

  std::string eval_mode;  // "", "linkpred" or "classify"
  TaskSpec task;
  std::string labels_path;
  double classify_test_fraction = 0.3;
  LogRegConfig logreg;

  static PipelineConfig from_file(const std::string& path);
  void apply(const std::string& key, const std::string& value);  // throws on unknown key
  void validate() const;
  std::map<std::string, std::string> as_map() const;
};

// Reproducibility manifest: config hash, seed, version. One per command
// invocation that writes outputs.
void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const PipelineConfig& cfg);

// One selected aspect as persisted in a selection file: resolvable against
// any graph by edge type names.
struct SelectedAspect {
  std::string name;
  std::vector<std::string> edge_types;
  double inc = 0.0;
};

struct SelectionOutcome {
  double theta = 0.0;
  std::vector<SelectedAspect> aspects;
};

// Stage functions shared by the subcommands and `run` so the two paths
// produce byte-identical outputs.
HIN stage_ingest(const PipelineConfig& cfg);
std::string stage_score(const HIN& hin, const PipelineConfig& cfg);  // returns scores path
SelectionOutcome stage_select(const std::string& scores_path, const PipelineConfig& cfg,
                              bool write_file);
Aspect resolve_aspect(const HIN& hin, const SelectedAspect& sel);
Aspect parse_aspect_arg(const HIN& hin, const std::string& arg);  // letters or comma type names
std::vector<std::string> stage_train(const HIN& hin, const std::vector<SelectedAspect>& aspects,
                                     const PipelineConfig& cfg);  // returns embedding paths
std::string stage_compose(const HIN& hin, const std::vector<std::string>& embedding_paths,
                          const PipelineConfig& cfg);  // returns manifest path

SelectionOutcome read_selection_file(const std::string& path);
void write_selection_file(const std::string& path, const SelectionOutcome& sel);

// Reduced-graph link-prediction experiment: split queries, drop the test
// queries from the training graph, train one space per aspect, evaluate.
LinkPredMetrics linkpred_experiment(const HIN& hin, const std::vector<SelectedAspect>& aspects,
                                    const TaskSpec& task, const TrainConfig& train,
                                    const LogRegConfig& logreg, std::span<const int> ks);

void stage_eval(const HIN& hin, const std::string& bundle_manifest, const PipelineConfig& cfg,
                const std::string& metrics_path);

// Full pipeline: ingest, score (or load), select, train, compose, eval.
void run_pipeline(const PipelineConfig& cfg);

}  // namespace aspem
