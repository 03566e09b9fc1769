#include <doctest.h>

#include <fstream>

#include "aspem/compose.hpp"
#include "aspem/rng.hpp"
#include "test_util.hpp"

using namespace aspem;
using testutil::TempDir;

namespace {

EmbeddingTable make_table(const std::string& name, int dim,
                          const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  EmbeddingTable t(name, dim);
  for (const auto& [id, vec] : rows) {
    int r = t.add(id);
    std::copy(vec.begin(), vec.end(), t.row(r).begin());
  }
  return t;
}

AspectBundle two_aspect_bundle() {
  AspectBundle bundle;
  bundle.entries.push_back(
      {"UMA", {"U", "M", "A"},
       make_table("UMA", 2, {{"u1", {1, 2}}, {"m1", {3, 4}}, {"a1", {5, 6}}})});
  bundle.entries.push_back(
      {"UMD", {"U", "M", "D"},
       make_table("UMD", 2, {{"u1", {3, 4}}, {"m1", {0.5, 2}}, {"d1", {7, 8}}})});
  return bundle;
}

}  // namespace

TEST_SUITE("compose") {

TEST_CASE("node embedding concatenates in bundle order") {
  AspectBundle bundle = two_aspect_bundle();
  CHECK(node_embedding(bundle, "u1") == std::vector<double>{1, 2, 3, 4});
  // nodes covered by a single aspect get that aspect's dimension
  CHECK(node_embedding(bundle, "a1") == std::vector<double>{5, 6});
  CHECK(node_embedding(bundle, "d1") == std::vector<double>{7, 8});
  CHECK_THROWS(node_embedding(bundle, "nobody"));
}

TEST_CASE("three aspects of dimension ten make a thirty-dim node vector") {
  AspectBundle bundle;
  for (const char* name : {"UMA", "UMD", "UMG"}) {
    EmbeddingTable t(name, 10);
    int r = t.add("u1");
    for (double& v : t.row(r)) v = 1.0;
    bundle.entries.push_back({name, {"U", "M"}, std::move(t)});
  }
  CHECK(node_embedding(bundle, "u1").size() == 30);
}

TEST_CASE("edge embedding is the per-aspect hadamard concatenation") {
  AspectBundle bundle = two_aspect_bundle();
  // u1/m1 share both aspects: [1,2]*[3,4] then [3,4]*[0.5,2]
  CHECK(edge_embedding(bundle, "u1", "m1") == std::vector<double>{3, 8, 1.5, 8});
  // u1/a1 share only the first
  CHECK(edge_embedding(bundle, "u1", "a1") == std::vector<double>{5, 12});
  CHECK_THROWS(edge_embedding(bundle, "a1", "d1"));  // no shared aspect
}

TEST_CASE("edge embedding of a zero vector is zero") {
  AspectBundle bundle;
  bundle.entries.push_back(
      {"X", {"U", "M"}, make_table("X", 3, {{"u", {0, 0, 0}}, {"m", {4, 5, 6}}})});
  CHECK(edge_embedding(bundle, "u", "m") == std::vector<double>{0, 0, 0});
}

TEST_CASE("edge embedding commutes and its block sums are dot products") {
  Rng rng = make_rng(14);
  EmbeddingTable t("R", 7);
  for (int i = 0; i < 5; ++i) {
    t.add("n" + std::to_string(i));
    for (double& v : t.row(i)) v = uniform01(rng) * 4.0 - 2.0;
  }
  AspectBundle bundle;
  bundle.entries.push_back({"R", {"T"}, std::move(t)});
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      auto uv = edge_embedding(bundle, "n" + std::to_string(i), "n" + std::to_string(j));
      auto vu = edge_embedding(bundle, "n" + std::to_string(j), "n" + std::to_string(i));
      CHECK(uv == vu);
      double sum = 0, dot = 0;
      const auto& table = bundle.entries[0].table;
      for (int k = 0; k < 7; ++k) {
        sum += uv[k];
        dot += table.row(i)[k] * table.row(j)[k];
      }
      CHECK(std::abs(sum - dot) < 1e-9);
    }
}

TEST_CASE("scalar-loop oracle confirms two-aspect edge embeddings") {
  AspectBundle bundle = two_aspect_bundle();
  auto e = edge_embedding(bundle, "u1", "m1");
  std::vector<double> expect;
  for (const BundleEntry& entry : bundle.entries) {
    int ru = entry.table.find("u1");
    int rm = entry.table.find("m1");
    for (int k = 0; k < entry.table.dim(); ++k)
      expect.push_back(entry.table.row(ru)[k] * entry.table.row(rm)[k]);
  }
  REQUIRE(e.size() == 4);
  CHECK(e == expect);
}

TEST_CASE("bundle write/read round-trips order, names, vectors") {
  AspectBundle bundle = two_aspect_bundle();
  TempDir dir("bundle");
  write_bundle(bundle, dir.str(), /*binary=*/true);
  AspectBundle again = read_bundle(dir.file("bundle.manifest"));
  REQUIRE(again.entries.size() == 2);
  CHECK(again.entries[0].aspect_name == "UMA");
  CHECK(again.entries[1].aspect_name == "UMD");
  CHECK(again.entries[0].node_types == std::vector<std::string>{"U", "M", "A"});
  CHECK(node_embedding(again, "u1") == node_embedding(bundle, "u1"));
  CHECK(edge_embedding(again, "u1", "m1") == edge_embedding(bundle, "u1", "m1"));
}

TEST_CASE("missing embedding file is named in the error") {
  AspectBundle bundle = two_aspect_bundle();
  TempDir dir("missing");
  write_bundle(bundle, dir.str());
  std::filesystem::remove(dir.file("UMD.emb"));
  CHECK_THROWS_WITH_AS(read_bundle(dir.file("bundle.manifest")), doctest::Contains("UMD"),
                       std::runtime_error);
}

TEST_CASE("manifest dimension mismatch is rejected") {
  AspectBundle bundle = two_aspect_bundle();
  TempDir dir("dimmismatch");
  write_bundle(bundle, dir.str());
  // rewrite the manifest with a wrong dimension
  {
    std::ofstream out(dir.file("bundle.manifest"));
    out << "%aspect\tUMA\t3\tU,M,A\tUMA.emb\n";
  }
  CHECK_THROWS_WITH_AS(read_bundle(dir.file("bundle.manifest")),
                       doctest::Contains("dimension mismatch"), std::runtime_error);
}

TEST_CASE("pair_block_dim sums shared-aspect dimensions") {
  AspectBundle bundle = two_aspect_bundle();
  CHECK(pair_block_dim(bundle, "U", "M") == 4);
  CHECK(pair_block_dim(bundle, "U", "A") == 2);
  CHECK(pair_block_dim(bundle, "A", "D") == 0);
}

}  // TEST_SUITE
