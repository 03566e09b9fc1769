#include "aspem/compose.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aspem {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

}  // namespace

int AspectBundle::find_aspect(const std::string& name) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].aspect_name == name) return static_cast<int>(i);
  return -1;
}

bool AspectBundle::aspect_has_type(int entry, const std::string& type_name) const {
  const auto& types = entries[entry].node_types;
  return std::find(types.begin(), types.end(), type_name) != types.end();
}

std::vector<double> node_embedding(const AspectBundle& bundle, const std::string& u) {
  std::vector<double> out;
  for (const BundleEntry& e : bundle.entries) {
    int row = e.table.find(u);
    if (row < 0) continue;
    auto r = e.table.row(row);
    out.insert(out.end(), r.begin(), r.end());
  }
  if (out.empty()) fail("node '" + u + "' appears in no aspect of the bundle");
  return out;
}

std::vector<double> edge_embedding(const AspectBundle& bundle, const std::string& u,
                                   const std::string& v) {
  std::vector<double> out;
  bool shared = false;
  for (const BundleEntry& e : bundle.entries) {
    int ru = e.table.find(u);
    int rv = e.table.find(v);
    if (ru < 0 || rv < 0) continue;
    shared = true;
    auto fu = e.table.row(ru);
    auto fv = e.table.row(rv);
    for (std::size_t i = 0; i < fu.size(); ++i) out.push_back(fu[i] * fv[i]);
  }
  if (!shared) fail("nodes '" + u + "' and '" + v + "' share no aspect in the bundle");
  return out;
}

int pair_block_dim(const AspectBundle& bundle, const std::string& type_a,
                   const std::string& type_b) {
  int dim = 0;
  for (std::size_t i = 0; i < bundle.entries.size(); ++i) {
    int e = static_cast<int>(i);
    if (bundle.aspect_has_type(e, type_a) && bundle.aspect_has_type(e, type_b))
      dim += bundle.entries[i].table.dim();
  }
  return dim;
}

void write_bundle(const AspectBundle& bundle, const std::string& dir, bool binary) {
  fs::create_directories(dir);
  std::ofstream manifest(fs::path(dir) / "bundle.manifest");
  if (!manifest) fail("cannot write bundle manifest under '" + dir + "'");
  for (const BundleEntry& e : bundle.entries) {
    std::string file = e.aspect_name + ".emb";
    write_embedding(e.table, (fs::path(dir) / file).string(), binary);
    std::string types;
    for (const auto& t : e.node_types) types += (types.empty() ? "" : ",") + t;
    manifest << "%aspect\t" << e.aspect_name << '\t' << e.table.dim() << '\t' << types << '\t'
             << file << '\n';
  }
}

AspectBundle read_bundle(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail("cannot open bundle manifest '" + manifest_path + "'");
  fs::path base = fs::path(manifest_path).parent_path();
  AspectBundle bundle;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag, name, dim_tok, types_tok, file;
    if (!std::getline(ss, tag, '\t') || tag != "%aspect" || !std::getline(ss, name, '\t') ||
        !std::getline(ss, dim_tok, '\t') || !std::getline(ss, types_tok, '\t') ||
        !std::getline(ss, file, '\t'))
      fail(manifest_path + ":" + std::to_string(lineno) +
           ": expected '%aspect\\t<name>\\t<dim>\\t<types>\\t<file>'");
    if (bundle.find_aspect(name) >= 0)
      fail(manifest_path + ":" + std::to_string(lineno) + ": duplicate aspect '" + name + "'");

    BundleEntry entry;
    entry.aspect_name = name;
    std::istringstream ts(types_tok);
    std::string t;
    while (std::getline(ts, t, ','))
      if (!t.empty()) entry.node_types.push_back(t);

    fs::path emb_path = fs::path(file).is_absolute() ? fs::path(file) : base / file;
    if (!fs::exists(emb_path))
      fail(manifest_path + ":" + std::to_string(lineno) + ": aspect '" + name +
           "' embedding file missing: " + emb_path.string());
    entry.table = read_embedding(emb_path.string());
    int declared_dim = std::stoi(dim_tok);
    if (entry.table.dim() != declared_dim)
      fail(manifest_path + ":" + std::to_string(lineno) + ": aspect '" + name +
           "' dimension mismatch: manifest says " + dim_tok + ", file has " +
           std::to_string(entry.table.dim()));
    if (entry.table.aspect_name() != name)
      fail(manifest_path + ":" + std::to_string(lineno) + ": aspect '" + name +
           "' file carries aspect name '" + entry.table.aspect_name() + "'");
    bundle.entries.push_back(std::move(entry));
  }
  if (bundle.entries.empty()) fail(manifest_path + ": bundle manifest lists no aspects");
  return bundle;
}

}  // namespace aspem
