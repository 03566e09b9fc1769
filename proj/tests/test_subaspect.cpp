#include <doctest.h>

#include "aspem/subaspect.hpp"
#include "test_util.hpp"

using namespace aspem;

namespace {

// the five-edge star schema used by the bibliographic fixtures
SchemaGraph dblp_schema() {
  SchemaGraph s;
  NodeTypeId a = s.node_types.add("A");
  NodeTypeId p = s.node_types.add("P");
  NodeTypeId r = s.node_types.add("R");
  NodeTypeId t = s.node_types.add("T");
  NodeTypeId v = s.node_types.add("V");
  NodeTypeId y = s.node_types.add("Y");
  auto decl = [&](const char* name, NodeTypeId src, NodeTypeId dst) {
    EdgeTypeId id = s.edge_types.add(name);
    s.edges.push_back({id, src, dst, true});
  };
  decl("write", a, p);
  decl("cite", p, r);
  decl("contain", p, t);
  decl("publish", p, v);
  decl("year", p, y);
  return s;
}

}  // namespace

TEST_SUITE("subaspect") {

TEST_CASE("full dblp schema has exactly ten sub-aspects") {
  SchemaGraph schema = dblp_schema();
  std::vector<EdgeTypeId> all{0, 1, 2, 3, 4};
  Aspect a = Aspect::from_edge_types(schema, all);
  CHECK(enumerate_sub_aspects(a, schema).size() == 10);
}

TEST_CASE("single edge type aspect has no sub-aspects") {
  SchemaGraph schema = dblp_schema();
  Aspect a = Aspect::from_edge_types(schema, {0});
  CHECK(enumerate_sub_aspects(a, schema).empty());
  CHECK(a.name == "AP");
}

TEST_CASE("two-edge aspect has exactly the joining sub-aspect") {
  SchemaGraph schema = dblp_schema();
  EdgeTypeId write = schema.edge_types.find("write");
  EdgeTypeId year = schema.edge_types.find("year");
  Aspect apy = Aspect::from_edge_types(schema, {write, year});
  CHECK(apy.name == "APY");
  auto subs = enumerate_sub_aspects(apy, schema);
  REQUIRE(subs.size() == 1);
  CHECK(subs[0].center == schema.node_types.find("P"));
  CHECK(subs[0].to_string(schema) == "A-write-P-year-Y");
}

TEST_CASE("canonical form collapses mirrors") {
  SchemaGraph schema = dblp_schema();
  NodeTypeId p = schema.node_types.find("P");
  NodeTypeId a = schema.node_types.find("A");
  NodeTypeId r = schema.node_types.find("R");
  SubAspect s1 = SubAspect::make(p, 0, a, 1, r);
  SubAspect s2 = SubAspect::make(p, 1, r, 0, a);
  CHECK(s1 == s2);
}

TEST_CASE("edge types sharing both endpoints give two sub-aspects") {
  SchemaGraph schema;
  NodeTypeId x = schema.node_types.add("X");
  NodeTypeId y = schema.node_types.add("Y");
  schema.edges.push_back({schema.edge_types.add("e0"), x, y, true});
  schema.edges.push_back({schema.edge_types.add("e1"), x, y, true});
  Aspect a = Aspect::from_edge_types(schema, {0, 1});
  auto subs = enumerate_sub_aspects(a, schema);
  REQUIRE(subs.size() == 2);
  CHECK(subs[0].center != subs[1].center);
}

TEST_CASE("aspect invariants: induced types, connectivity, nonempty edges") {
  SchemaGraph schema = dblp_schema();
  Aspect a = Aspect::from_edge_types(schema, {0, 4});
  CHECK(a.node_types.size() == 3);  // A, P, Y
  CHECK_THROWS(Aspect::from_edge_types(schema, {}));

  // V-T has no direct edge, so {V,T} induces nothing
  std::vector<NodeTypeId> vt{schema.node_types.find("V"), schema.node_types.find("T")};
  CHECK_THROWS(Aspect::from_node_types(schema, vt));

  // disconnected pair of schema edges
  SchemaGraph two;
  NodeTypeId a1 = two.node_types.add("A");
  NodeTypeId b1 = two.node_types.add("B");
  NodeTypeId c1 = two.node_types.add("C");
  NodeTypeId d1 = two.node_types.add("D");
  two.edges.push_back({two.edge_types.add("ab"), a1, b1, true});
  two.edges.push_back({two.edge_types.add("cd"), c1, d1, true});
  CHECK_THROWS(Aspect::from_edge_types(two, {0, 1}));
}

TEST_CASE("aspect from node letters induces the subgraph") {
  SchemaGraph schema = dblp_schema();
  std::vector<NodeTypeId> types;
  for (const char* n : {"A", "P", "R", "T", "V"}) types.push_back(schema.node_types.find(n));
  Aspect a = Aspect::from_node_types(schema, types);
  CHECK(a.name == "APRTV");
  CHECK(a.edge_types.size() == 4);  // write, cite, contain, publish
}

TEST_CASE("score table rejects negatives and reports missing keys") {
  SchemaGraph schema = dblp_schema();
  ScoreTable scores;
  SubAspect s = SubAspect::make(schema.node_types.find("P"), 0, schema.node_types.find("A"), 1,
                                schema.node_types.find("R"));
  CHECK_THROWS(scores.set(s, -1.0));
  scores.set(s, 2.5);
  CHECK(*scores.find(s) == 2.5);
  Aspect apy = Aspect::from_edge_types(schema, {0, 4});
  CHECK_THROWS_WITH_AS(inc_aspect(scores, schema, apy), doctest::Contains("missing"),
                       std::runtime_error);
}

TEST_CASE("score file round-trip preserves schema and values") {
  ScoreFile sf = read_score_file(testutil::fixture("dblp_scores.tsv"));
  CHECK(sf.scores.size() == 10);
  CHECK(sf.schema.node_types.size() == 6);
  CHECK(sf.schema.edge_types.size() == 5);
  // fixture row order pins the registration order used for aspect names
  CHECK(sf.schema.node_types.name(0) == "A");
  CHECK(sf.schema.node_types.name(1) == "P");
  CHECK(sf.schema.node_types.name(5) == "Y");

  testutil::TempDir dir("scorefile");
  write_score_file(dir.file("s.tsv"), sf.schema, sf.scores);
  ScoreFile again = read_score_file(dir.file("s.tsv"));
  CHECK(again.scores.size() == sf.scores.size());
  for (const auto& [key, value] : sf.scores.entries()) {
    auto it = again.scores.entries().find(key);
    REQUIRE(it != again.scores.entries().end());
    CHECK(it->second == value);
  }
}

TEST_CASE("score file parse errors carry line numbers") {
  testutil::TempDir dir("badscores");
  {
    std::ofstream out(dir.file("bad.tsv"));
    out << "%subaspect A write P cite R 1.0\n%subaspect A write P\n";
  }
  CHECK_THROWS_WITH_AS(read_score_file(dir.file("bad.tsv")), doctest::Contains(":2:"),
                       std::runtime_error);
  {
    std::ofstream out(dir.file("dup.tsv"));
    out << "%subaspect A write P cite R 1.0\n%subaspect R cite P write A 2.0\n";
  }
  CHECK_THROWS_WITH_AS(read_score_file(dir.file("dup.tsv")), doctest::Contains("duplicate"),
                       std::runtime_error);
}

}  // TEST_SUITE
