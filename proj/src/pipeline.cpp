#include "aspem/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "aspem/incompat.hpp"

namespace aspem {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

long long parse_count(const std::string& v) {
  // accepts 1000000 and 1e6 style spellings
  double d = std::stod(v);
  if (d < 0) fail("negative count '" + v + "'");
  return static_cast<long long>(d);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  PipelineConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(path + ":" + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t");
      std::size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    try {
      cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      fail(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void PipelineConfig::apply(const std::string& key, const std::string& value) {
  if (key == "nodes") nodes_path = value;
  else if (key == "edges") edges_path = value;
  else if (key == "scores") scores_path = value;
  else if (key == "out") out_dir = value;
  else if (key == "anchor") anchors = split_list(value);
  else if (key == "theta") theta = value == "auto" ? -1.0 : std::stod(value);
  else if (key == "dim") train.dim = std::stoi(value);
  else if (key == "samples") train.samples = parse_count(value);
  else if (key == "negatives") train.negatives = std::stoi(value);
  else if (key == "workers") train.workers = std::stoi(value);
  else if (key == "seed") {
    train.seed = std::stoull(value);
    task.seed = train.seed;
    logreg.seed = train.seed;
  } else if (key == "lr") train.initial_lr = std::stod(value);
  else if (key == "noise_power") train.noise_power = std::stod(value);
  else if (key == "binary") binary_embeddings = value == "1" || value == "true";
  else if (key == "eval") eval_mode = value;
  else if (key == "target_edge") task.target_edge = value;
  else if (key == "query_side") {
    if (value != "src" && value != "dst") fail("query_side must be 'src' or 'dst'");
    task.query_is_src = value == "src";
  } else if (key == "attr_edges") task.attr_edges = split_list(value);
  else if (key == "candidates") task.candidate_count = std::stoi(value);
  else if (key == "test_fraction") {
    task.test_fraction = std::stod(value);
    classify_test_fraction = task.test_fraction;
  } else if (key == "labels") labels_path = value;
  else if (key == "logreg_epochs") logreg.epochs = std::stoi(value);
  else if (key == "logreg_lr") logreg.lr = std::stod(value);
  else if (key == "logreg_l2") logreg.l2 = std::stod(value);
  else fail("unknown config key '" + key + "'");
}

void PipelineConfig::validate() const {
  if (nodes_path.empty() || edges_path.empty()) fail("config: nodes and edges paths are required");
  if (!fs::exists(nodes_path)) fail("config: node file does not exist: " + nodes_path);
  if (!fs::exists(edges_path)) fail("config: edge file does not exist: " + edges_path);
  if (!scores_path.empty() && !fs::exists(scores_path))
    fail("config: score file does not exist: " + scores_path);
  if (anchors.empty()) fail("config: at least one anchor node type is required");
  train.validate();
  if (eval_mode == "classify" && labels_path.empty())
    fail("config: classify evaluation needs a labels file");
  if (eval_mode == "linkpred" && task.target_edge.empty())
    fail("config: linkpred evaluation needs target_edge");
  if (!eval_mode.empty() && eval_mode != "linkpred" && eval_mode != "classify")
    fail("config: eval must be '', 'linkpred' or 'classify'");
}

std::map<std::string, std::string> PipelineConfig::as_map() const {
  std::map<std::string, std::string> m;
  m["nodes"] = nodes_path;
  m["edges"] = edges_path;
  m["scores"] = scores_path;
  m["out"] = out_dir;
  std::string a;
  for (const auto& s : anchors) a += (a.empty() ? "" : ",") + s;
  m["anchor"] = a;
  m["theta"] = theta < 0 ? "auto" : format_double(theta);
  m["dim"] = std::to_string(train.dim);
  m["samples"] = std::to_string(train.samples);
  m["negatives"] = std::to_string(train.negatives);
  m["workers"] = std::to_string(train.workers);
  m["seed"] = std::to_string(train.seed);
  m["lr"] = format_double(train.initial_lr);
  m["noise_power"] = format_double(train.noise_power);
  m["binary"] = binary_embeddings ? "1" : "0";
  m["eval"] = eval_mode;
  m["target_edge"] = task.target_edge;
  m["query_side"] = task.query_is_src ? "src" : "dst";
  std::string at;
  for (const auto& s : task.attr_edges) at += (at.empty() ? "" : ",") + s;
  m["attr_edges"] = at;
  m["candidates"] = std::to_string(task.candidate_count);
  m["test_fraction"] = format_double(task.test_fraction);
  m["labels"] = labels_path;
  m["logreg_epochs"] = std::to_string(logreg.epochs);
  m["logreg_lr"] = format_double(logreg.lr);
  m["logreg_l2"] = format_double(logreg.l2);
  return m;
}

void write_run_manifest(const std::string& out_dir, const std::string& command,
                        const PipelineConfig& cfg) {
  fs::create_directories(out_dir);
  std::string canonical;
  for (const auto& [k, v] : cfg.as_map()) canonical += k + "=" + v + "\n";
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical)));
  std::ofstream out(fs::path(out_dir) / (command + ".manifest"));
  out << "command " << command << '\n'
      << "version " << kVersion << '\n'
      << "seed " << cfg.train.seed << '\n'
      << "config_hash " << hash << '\n';
  for (const auto& [k, v] : cfg.as_map()) out << "config." << k << " = " << v << '\n';
}

HIN stage_ingest(const PipelineConfig& cfg) { return ingest(cfg.nodes_path, cfg.edges_path); }

std::string stage_score(const HIN& hin, const PipelineConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::string path = (fs::path(cfg.out_dir) / "scores.tsv").string();
  ScoreTable scores = compute_scores(hin, cfg.train.workers);
  write_score_file(path, hin.schema(), scores);
  return path;
}

SelectionOutcome stage_select(const std::string& scores_path, const PipelineConfig& cfg,
                              bool write_file) {
  ScoreFile sf = read_score_file(scores_path);
  std::vector<NodeTypeId> anchors;
  for (const std::string& name : cfg.anchors) {
    NodeTypeId t = sf.schema.node_types.find(name);
    if (t < 0) fail("anchor node type '" + name + "' not present in the score file schema");
    anchors.push_back(t);
  }
  double theta = cfg.theta;
  if (theta < 0) {
    theta = choose_threshold(sf.scores, sf.schema, anchors[0]);
    for (std::size_t i = 1; i < anchors.size(); ++i)
      theta = std::max(theta, choose_threshold(sf.scores, sf.schema, anchors[i]));
  }
  std::vector<Aspect> aspects = select_aspects(sf.scores, sf.schema, theta, anchors);

  SelectionOutcome out;
  out.theta = theta;
  for (const Aspect& a : aspects) {
    SelectedAspect sel;
    sel.name = a.name;
    for (EdgeTypeId r : a.edge_types) sel.edge_types.push_back(sf.schema.edge_types.name(r));
    sel.inc = inc_aspect(sf.scores, sf.schema, a);
    out.aspects.push_back(std::move(sel));
  }
  if (write_file) {
    fs::create_directories(cfg.out_dir);
    write_selection_file((fs::path(cfg.out_dir) / "selection.tsv").string(), out);
  }
  return out;
}

void write_selection_file(const std::string& path, const SelectionOutcome& sel) {
  std::ofstream out(path);
  if (!out) fail("cannot write selection file '" + path + "'");
  out << "%theta " << format_double(sel.theta) << '\n';
  for (const SelectedAspect& a : sel.aspects) {
    out << "%aspect " << a.name << ' ';
    for (std::size_t i = 0; i < a.edge_types.size(); ++i)
      out << (i ? "," : "") << a.edge_types[i];
    out << ' ' << format_double(a.inc) << '\n';
  }
}

SelectionOutcome read_selection_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open selection file '" + path + "'");
  SelectionOutcome sel;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "%theta") {
      if (!(ss >> sel.theta)) fail(path + ":" + std::to_string(lineno) + ": bad theta line");
    } else if (tag == "%aspect") {
      SelectedAspect a;
      std::string edges;
      if (!(ss >> a.name >> edges >> a.inc))
        fail(path + ":" + std::to_string(lineno) + ": expected '%aspect <name> <edges> <inc>'");
      a.edge_types = split_list(edges);
      sel.aspects.push_back(std::move(a));
    } else {
      fail(path + ":" + std::to_string(lineno) + ": unknown line '" + line + "'");
    }
  }
  if (sel.aspects.empty()) fail(path + ": selection file lists no aspects");
  return sel;
}

Aspect resolve_aspect(const HIN& hin, const SelectedAspect& sel) {
  std::vector<EdgeTypeId> edges;
  for (const std::string& name : sel.edge_types) {
    EdgeTypeId r = hin.schema().edge_types.find(name);
    if (r < 0) fail("aspect '" + sel.name + "': edge type '" + name + "' not in the graph");
    edges.push_back(r);
  }
  return Aspect::from_edge_types(hin.schema(), std::move(edges));
}

Aspect parse_aspect_arg(const HIN& hin, const std::string& arg) {
  const NameRegistry& reg = hin.schema().node_types;
  std::vector<NodeTypeId> types;
  if (arg.find(',') != std::string::npos) {
    for (const std::string& t : split_list(arg)) {
      NodeTypeId id = reg.find(t);
      if (id < 0) fail("unknown node type '" + t + "' in aspect '" + arg + "'");
      types.push_back(id);
    }
  } else {
    // single-letter concatenated form, e.g. APRTV
    for (char c : arg) {
      NodeTypeId id = reg.find(std::string(1, c));
      if (id < 0)
        fail("unknown node type '" + std::string(1, c) + "' in aspect '" + arg +
             "' (use a comma list for multi-character type names)");
      types.push_back(id);
    }
  }
  return Aspect::from_node_types(hin.schema(), types);
}

std::vector<std::string> stage_train(const HIN& hin, const std::vector<SelectedAspect>& aspects,
                                     const PipelineConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> paths;
  for (const SelectedAspect& sel : aspects) {
    Aspect a = resolve_aspect(hin, sel);
    EmbeddingTable table = train_aspect(hin, a, cfg.train);
    std::string path = (fs::path(cfg.out_dir) / (a.name + ".emb")).string();
    write_embedding(table, path, cfg.binary_embeddings);
    paths.push_back(path);
  }
  return paths;
}

std::string stage_compose(const HIN& hin, const std::vector<std::string>& embedding_paths,
                          const PipelineConfig& cfg) {
  AspectBundle bundle;
  for (const std::string& path : embedding_paths) {
    BundleEntry entry;
    entry.table = read_embedding(path);
    entry.aspect_name = entry.table.aspect_name();
    std::vector<bool> seen(hin.schema().node_types.size(), false);
    for (int i = 0; i < entry.table.size(); ++i) {
      NodeId u = hin.find_node(entry.table.id(i));
      if (u == kNoNode) fail("embedding file '" + path + "' covers unknown node '" +
                             entry.table.id(i) + "'");
      seen[hin.node_type(u)] = true;
    }
    for (NodeTypeId t = 0; t < hin.schema().node_types.size(); ++t)
      if (seen[t]) entry.node_types.push_back(hin.schema().node_types.name(t));
    bundle.entries.push_back(std::move(entry));
  }
  std::string dir = (fs::path(cfg.out_dir) / "bundle").string();
  write_bundle(bundle, dir, cfg.binary_embeddings);
  return (fs::path(dir) / "bundle.manifest").string();
}

LinkPredMetrics linkpred_experiment(const HIN& hin, const std::vector<SelectedAspect>& aspects,
                                    const TaskSpec& task, const TrainConfig& train,
                                    const LogRegConfig& logreg, std::span<const int> ks) {
  InstanceSet instances = make_instances(hin, task);
  HIN train_graph = remove_nodes(hin, instances.test_queries);

  AspectBundle bundle;
  for (const SelectedAspect& sel : aspects) {
    Aspect a = resolve_aspect(train_graph, sel);
    BundleEntry entry;
    entry.table = train_aspect(train_graph, a, train);
    entry.aspect_name = a.name;
    for (NodeTypeId t : a.node_types)
      entry.node_types.push_back(train_graph.schema().node_types.name(t));
    bundle.entries.push_back(std::move(entry));
  }
  return linkpred_harness(bundle, instances.anchor_type, instances.train, instances.test, logreg,
                          ks);
}

void stage_eval(const HIN& hin, const std::string& bundle_manifest, const PipelineConfig& cfg,
                const std::string& metrics_path) {
  std::ofstream out(metrics_path);
  if (!out) fail("cannot write metrics file '" + metrics_path + "'");
  if (cfg.eval_mode == "linkpred") {
    AspectBundle bundle = read_bundle(bundle_manifest);
    InstanceSet instances = make_instances(hin, cfg.task);
    int ks[] = {1, 3, 10};
    LinkPredMetrics m =
        linkpred_harness(bundle, instances.anchor_type, instances.train, instances.test,
                         cfg.logreg, ks);
    out << "metric\tvalue\n";
    std::ostringstream table;
    for (std::size_t i = 0; i < m.ks.size(); ++i) {
      out << "P@" << m.ks[i] << '\t' << format_double(m.precision[i]) << '\n';
      out << "R@" << m.ks[i] << '\t' << format_double(m.recall[i]) << '\n';
      table << "  P@" << m.ks[i] << " = " << format_double(m.precision[i]) << "   R@" << m.ks[i]
            << " = " << format_double(m.recall[i]) << '\n';
    }
    std::cout << "link prediction over " << m.num_queries << " test queries:\n" << table.str();
  } else if (cfg.eval_mode == "classify") {
    AspectBundle bundle = read_bundle(bundle_manifest);
    auto labeled = read_labels(cfg.labels_path);
    ClassifyResult r =
        classify_harness(bundle, labeled, cfg.classify_test_fraction, cfg.train.seed, cfg.logreg);
    out << "metric\tvalue\n";
    out << "accuracy\t" << format_double(r.acc) << '\n';
    std::cout << "classification accuracy = " << format_double(r.acc) << " (" << r.train_count
              << " train / " << r.test_count << " test)\n";
  }
}

void run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  write_run_manifest(cfg.out_dir, "run", cfg);

  HIN hin = stage_ingest(cfg);
  std::string scores_path = cfg.scores_path.empty() ? stage_score(hin, cfg) : cfg.scores_path;
  SelectionOutcome sel = stage_select(scores_path, cfg, true);

  std::cout << "theta = " << format_double(sel.theta) << '\n';
  std::cout << "aspects = {";
  for (std::size_t i = 0; i < sel.aspects.size(); ++i)
    std::cout << (i ? ", " : "") << sel.aspects[i].name;
  std::cout << "}\n";

  std::vector<std::string> emb_paths = stage_train(hin, sel.aspects, cfg);
  std::string manifest = stage_compose(hin, emb_paths, cfg);
  if (!cfg.eval_mode.empty())
    stage_eval(hin, manifest, cfg, (fs::path(cfg.out_dir) / "metrics.tsv").string());
}

}  // namespace aspem
