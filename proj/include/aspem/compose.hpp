#pragma once

#include <string>
#include <vector>

#include "aspem/embedding.hpp"

namespace aspem {

// Ordered list of per-aspect embedding spaces. The order is fixed when the
// bundle is assembled and persisted in the manifest so downstream feature
// indices stay stable.
struct BundleEntry {
  std::string aspect_name;
  std::vector<std::string> node_types;  // names of the aspect's node types
  EmbeddingTable table;
};

struct AspectBundle {
  std::vector<BundleEntry> entries;

  int find_aspect(const std::string& name) const;  // -1 if absent
  bool aspect_has_type(int entry, const std::string& type_name) const;
};

// Concatenation of u's vectors over the aspects containing it, in bundle
// order. Throws when u appears in no aspect.
std::vector<double> node_embedding(const AspectBundle& bundle, const std::string& u);

// Concatenated per-aspect Hadamard products over the aspects containing
// both nodes. Throws when no aspect is shared.
std::vector<double> edge_embedding(const AspectBundle& bundle, const std::string& u,
                                   const std::string& v);

// Total edge-embedding dimension for a pair of node types.
int pair_block_dim(const AspectBundle& bundle, const std::string& type_a,
                   const std::string& type_b);

// Manifest "bundle.manifest" plus one embedding file per aspect under dir.
void write_bundle(const AspectBundle& bundle, const std::string& dir, bool binary = false);
AspectBundle read_bundle(const std::string& manifest_path);

}  // namespace aspem
