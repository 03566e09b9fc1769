#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aspem/incompat.hpp"
#include "aspem/pipeline.hpp"

namespace fs = std::filesystem;
using namespace aspem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void print_selection(const SelectionOutcome& sel) {
  std::cout << "theta = " << fmt(sel.theta) << '\n';
  std::cout << "aspects = {";
  for (std::size_t i = 0; i < sel.aspects.size(); ++i)
    std::cout << (i ? ", " : "") << sel.aspects[i].name;
  std::cout << "}\n";
  for (const SelectedAspect& a : sel.aspects) {
    std::cout << "  " << a.name << "  inc=" << fmt(a.inc) << "  edges=";
    for (std::size_t i = 0; i < a.edge_types.size(); ++i)
      std::cout << (i ? "," : "") << a.edge_types[i];
    std::cout << '\n';
  }
}

std::vector<SelectedAspect> aspects_for_training(const HIN& hin, const std::string& aspect_arg,
                                                 const std::string& selection_path,
                                                 bool full_schema) {
  std::vector<SelectedAspect> out;
  if (full_schema) {
    std::vector<EdgeTypeId> all;
    for (const SchemaEdge& e : hin.schema().edges) all.push_back(e.id);
    Aspect a = Aspect::from_edge_types(hin.schema(), all);
    SelectedAspect sel;
    sel.name = a.name;
    for (EdgeTypeId r : a.edge_types) sel.edge_types.push_back(hin.schema().edge_types.name(r));
    out.push_back(std::move(sel));
  } else if (!selection_path.empty()) {
    out = read_selection_file(selection_path).aspects;
  } else if (!aspect_arg.empty()) {
    Aspect a = parse_aspect_arg(hin, aspect_arg);
    SelectedAspect sel;
    sel.name = a.name;
    for (EdgeTypeId r : a.edge_types) sel.edge_types.push_back(hin.schema().edge_types.name(r));
    out.push_back(std::move(sel));
  } else {
    throw std::runtime_error("one of --aspect or --selection is required");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aspem: aspect-aware heterogeneous network embedding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("aspem ") + kVersion);

  PipelineConfig cfg;
  std::string config_path, aspect_arg, selection_path, bundle_path, emb_out, metrics_out;
  std::vector<std::string> emb_paths, overrides;
  std::string sweep_param = "dim", sweep_values;
  bool auto_theta = false, experiment = false;
  double theta_arg = -1.0;

  auto add_graph_flags = [&](CLI::App* cmd) {
    cmd->add_option("--nodes", cfg.nodes_path, "node file")->required();
    cmd->add_option("--edges", cfg.edges_path, "edge file")->required();
  };
  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dim", cfg.train.dim, "embedding dimension per aspect");
    cmd->add_option("--samples", cfg.train.samples, "total edge samples")
        ->transform([](std::string s) {
          return std::to_string(static_cast<long long>(std::stod(s)));
        });
    cmd->add_option("--negatives", cfg.train.negatives, "negative samples per edge");
    cmd->add_option("--lr", cfg.train.initial_lr, "initial learning rate");
    cmd->add_flag("--binary", cfg.binary_embeddings, "write binary embedding files");
  };
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--seed", cfg.train.seed, "rng seed")->each([&](std::string v) {
      cfg.task.seed = std::stoull(v);
      cfg.logreg.seed = cfg.task.seed;
    });
    cmd->add_option("--workers", cfg.train.workers, "worker threads");
  };

  CLI::App* c_ingest = app.add_subcommand("ingest", "parse and normalize a graph");
  add_graph_flags(c_ingest);
  add_common(c_ingest);

  CLI::App* c_score = app.add_subcommand("score", "compute sub-aspect incompatibility scores");
  add_graph_flags(c_score);
  add_common(c_score);

  CLI::App* c_select = app.add_subcommand("select", "select representative aspects");
  c_select->add_option("--scores", cfg.scores_path, "score table file")->required();
  c_select->add_option("--anchor", cfg.anchors, "anchor node type(s)")->required()->delimiter(',');
  c_select->add_option("--theta", theta_arg, "incompatibility threshold");
  c_select->add_flag("--auto-theta", auto_theta, "smallest theta covering all node types");
  add_common(c_select);

  CLI::App* c_train = app.add_subcommand("train", "train per-aspect embeddings");
  add_graph_flags(c_train);
  c_train->add_option("--aspect", aspect_arg, "aspect as node type letters or a comma list");
  c_train->add_option("--selection", selection_path, "train every aspect in a selection file");
  add_train_flags(c_train);
  add_common(c_train);

  CLI::App* c_onespace = app.add_subcommand("onespace", "train the full schema as one aspect");
  add_graph_flags(c_onespace);
  add_train_flags(c_onespace);
  add_common(c_onespace);

  CLI::App* c_compose = app.add_subcommand("compose", "assemble an aspect bundle");
  add_graph_flags(c_compose);
  c_compose->add_option("--emb", emb_paths, "embedding files, bundle order")->required();
  c_compose->add_flag("--binary", cfg.binary_embeddings, "write binary embedding files");
  add_common(c_compose);

  CLI::App* c_lp = app.add_subcommand("eval-linkpred", "link prediction evaluation");
  add_graph_flags(c_lp);
  c_lp->add_option("--bundle", bundle_path, "bundle manifest to evaluate");
  c_lp->add_flag("--experiment", experiment,
                 "holdout protocol: split, retrain on the reduced graph, evaluate");
  c_lp->add_option("--aspect", aspect_arg, "aspect for --experiment");
  c_lp->add_option("--selection", selection_path, "selection file for --experiment");
  c_lp->add_option("--target-edge", cfg.task.target_edge, "edge type to predict")->required();
  c_lp->add_option("--query-side", [&](const std::vector<std::string>& v) {
    cfg.task.query_is_src = v[0] == "src";
    return v[0] == "src" || v[0] == "dst";
  }, "which endpoint is the query: src|dst");
  c_lp->add_option("--attrs", cfg.task.attr_edges, "attribute edge types")->delimiter(',');
  c_lp->add_option("--candidates", cfg.task.candidate_count, "candidate set size");
  c_lp->add_option("--test-fraction", cfg.task.test_fraction, "test query fraction");
  add_train_flags(c_lp);
  add_common(c_lp);

  CLI::App* c_cls = app.add_subcommand("eval-classify", "node classification evaluation");
  c_cls->add_option("--bundle", bundle_path, "bundle manifest")->required();
  c_cls->add_option("--labels", cfg.labels_path, "labels file")->required();
  c_cls->add_option("--test-fraction", cfg.classify_test_fraction, "test fraction");
  add_common(c_cls);

  CLI::App* c_sweep = app.add_subcommand("sweep", "metrics across a parameter range");
  c_sweep->add_option("--config", config_path, "pipeline config file")->required();
  c_sweep->add_option("--param", sweep_param, "dim or samples");
  c_sweep->add_option("--values", sweep_values, "comma list of parameter values")->required();
  c_sweep->add_option("--out", cfg.out_dir, "output directory");

  CLI::App* c_run = app.add_subcommand("run", "full pipeline from a config file");
  c_run->add_option("--config", config_path, "config file")->required();
  c_run->add_option("--set", overrides, "key=value overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(c_ingest)) {
      HIN hin = stage_ingest(cfg);
      fs::create_directories(cfg.out_dir);
      write_run_manifest(cfg.out_dir, "ingest", cfg);
      write_graph(hin, (fs::path(cfg.out_dir) / "graph_nodes.tsv").string(),
                  (fs::path(cfg.out_dir) / "graph_edges.tsv").string());
      std::cout << hin.num_nodes() << " nodes, " << hin.num_edge_types() << " edge types\n";
      for (NodeTypeId t = 0; t < hin.schema().node_types.size(); ++t)
        std::cout << "  " << hin.schema().node_types.name(t) << ": "
                  << hin.nodes_of_type(t).size() << " nodes\n";
      for (const SchemaEdge& e : hin.schema().edges)
        std::cout << "  " << hin.schema().edge_types.name(e.id) << ": "
                  << hin.edges(e.id).arcs.size() << " arcs, total weight "
                  << fmt(hin.edges(e.id).total_weight) << '\n';
    } else if (app.got_subcommand(c_score)) {
      HIN hin = stage_ingest(cfg);
      write_run_manifest(cfg.out_dir, "score", cfg);
      std::string path = stage_score(hin, cfg);
      std::cout << "wrote " << path << '\n';
    } else if (app.got_subcommand(c_select)) {
      if (auto_theta == (theta_arg >= 0))
        throw std::runtime_error("select: pass exactly one of --theta or --auto-theta");
      cfg.theta = auto_theta ? -1.0 : theta_arg;
      bool write_file = c_select->count("--out") > 0;
      if (write_file) write_run_manifest(cfg.out_dir, "select", cfg);
      SelectionOutcome sel = stage_select(cfg.scores_path, cfg, write_file);
      print_selection(sel);
    } else if (app.got_subcommand(c_train) || app.got_subcommand(c_onespace)) {
      HIN hin = stage_ingest(cfg);
      bool full = app.got_subcommand(c_onespace);
      auto aspects = aspects_for_training(hin, aspect_arg, selection_path, full);
      write_run_manifest(cfg.out_dir, full ? "onespace" : "train", cfg);
      for (const std::string& path : stage_train(hin, aspects, cfg))
        std::cout << "wrote " << path << '\n';
    } else if (app.got_subcommand(c_compose)) {
      HIN hin = stage_ingest(cfg);
      write_run_manifest(cfg.out_dir, "compose", cfg);
      std::cout << "wrote " << stage_compose(hin, emb_paths, cfg) << '\n';
    } else if (app.got_subcommand(c_lp)) {
      HIN hin = stage_ingest(cfg);
      fs::create_directories(cfg.out_dir);
      write_run_manifest(cfg.out_dir, "eval-linkpred", cfg);
      std::string metrics_path = (fs::path(cfg.out_dir) / "metrics.tsv").string();
      if (experiment) {
        auto aspects = aspects_for_training(hin, aspect_arg, selection_path, false);
        int ks[] = {1, 3, 10};
        LinkPredMetrics m =
            linkpred_experiment(hin, aspects, cfg.task, cfg.train, cfg.logreg, ks);
        std::ofstream out(metrics_path);
        out << "metric\tvalue\n";
        for (std::size_t i = 0; i < m.ks.size(); ++i) {
          out << "P@" << m.ks[i] << '\t' << fmt(m.precision[i]) << '\n';
          out << "R@" << m.ks[i] << '\t' << fmt(m.recall[i]) << '\n';
          std::cout << "P@" << m.ks[i] << " = " << fmt(m.precision[i]) << "   R@" << m.ks[i]
                    << " = " << fmt(m.recall[i]) << '\n';
        }
      } else {
        if (bundle_path.empty())
          throw std::runtime_error("eval-linkpred: pass --bundle or --experiment");
        cfg.eval_mode = "linkpred";
        stage_eval(hin, bundle_path, cfg, metrics_path);
      }
      std::cout << "wrote " << metrics_path << '\n';
    } else if (app.got_subcommand(c_cls)) {
      fs::create_directories(cfg.out_dir);
      write_run_manifest(cfg.out_dir, "eval-classify", cfg);
      AspectBundle bundle = read_bundle(bundle_path);
      auto labeled = read_labels(cfg.labels_path);
      ClassifyResult r = classify_harness(bundle, labeled, cfg.classify_test_fraction,
                                          cfg.train.seed, cfg.logreg);
      std::string metrics_path = (fs::path(cfg.out_dir) / "metrics.tsv").string();
      std::ofstream out(metrics_path);
      out << "metric\tvalue\naccuracy\t" << fmt(r.acc) << '\n';
      std::cout << "accuracy = " << fmt(r.acc) << " (" << r.train_count << " train / "
                << r.test_count << " test)\n";
    } else if (app.got_subcommand(c_sweep)) {
      PipelineConfig base = PipelineConfig::from_file(config_path);
      if (c_sweep->count("--out")) base.out_dir = cfg.out_dir;
      base.validate();
      if (base.eval_mode != "linkpred")
        throw std::runtime_error("sweep: config must set eval = linkpred");
      if (sweep_param != "dim" && sweep_param != "samples")
        throw std::runtime_error("sweep: --param must be dim or samples");
      HIN hin = stage_ingest(base);
      std::string scores_path =
          base.scores_path.empty() ? stage_score(hin, base) : base.scores_path;
      SelectionOutcome sel = stage_select(scores_path, base, true);
      write_run_manifest(base.out_dir, "sweep", base);

      fs::create_directories(base.out_dir);
      std::string sweep_path = (fs::path(base.out_dir) / "sweep.tsv").string();
      std::ofstream out(sweep_path);
      out << "param\tvalue\tP@1\tP@3\tP@10\tR@1\tR@3\tR@10\n";
      std::istringstream vs(sweep_values);
      std::string v;
      int ks[] = {1, 3, 10};
      while (std::getline(vs, v, ',')) {
        PipelineConfig point = base;
        if (sweep_param == "dim")
          point.train.dim = std::stoi(v);
        else
          point.train.samples = static_cast<long long>(std::stod(v));
        LinkPredMetrics m =
            linkpred_experiment(hin, sel.aspects, point.task, point.train, point.logreg, ks);
        out << sweep_param << '\t' << v;
        for (double p : m.precision) out << '\t' << fmt(p);
        for (double r : m.recall) out << '\t' << fmt(r);
        out << '\n';
        std::cout << sweep_param << "=" << v << "  P@1=" << fmt(m.precision[0]) << '\n';
      }
      std::cout << "wrote " << sweep_path << '\n';
    } else if (app.got_subcommand(c_run)) {
      PipelineConfig run_cfg = PipelineConfig::from_file(config_path);
      for (const std::string& kv : overrides) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("--set expects key=value, got '" + kv + "'");
        run_cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
      }
      run_pipeline(run_cfg);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
