#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mapdfs/graph.hpp"
#include "oracles.hpp"

using namespace mapdfs;
using namespace mapdfs::testhelp;

TEST_CASE("four-node cycle is its own main area") {
  const char* text = R"({
    "nodes": [{"id":0,"x":0,"y":0,"kind":"plain"},{"id":1,"x":10,"y":0,"kind":"plain"},
              {"id":2,"x":10,"y":10,"kind":"plain"},{"id":3,"x":0,"y":10,"kind":"plain"}],
    "edges": [{"a":0,"b":1},{"a":1,"b":2},{"a":2,"b":3},{"a":3,"b":0}]
  })";
  EnvironmentGraph g = load_environment(text);
  CHECK(g.components.size() == 1);
  CHECK(g.components[0].nodes.size() == 4);
  CHECK(g.marginal_nodes.empty());
  CHECK(g.trees.empty());
}

TEST_CASE("bundled env4 has a ten-node main area in three components") {
  EnvironmentGraph g = load_environment_file(data_file("env4.json"));
  CHECK(g.main_nodes.size() == 10);
  CHECK(g.components.size() == 3);
  CHECK(check_component_intersections(biconnected_components(g)));
}

TEST_CASE("malformed environments are rejected") {
  CHECK_THROWS_AS(load_environment("not json"), ParseError);
  CHECK_THROWS_AS(load_environment(R"({"nodes":[],"edges":[]})"), ConsistencyError);

  // edge to an unknown node id
  CHECK_THROWS_AS(load_environment(R"({
    "nodes":[{"id":0,"x":0,"y":0,"kind":"plain"},{"id":1,"x":1,"y":0,"kind":"plain"}],
    "edges":[{"a":0,"b":7}]})"),
                  ConsistencyError);

  // duplicate node id
  CHECK_THROWS_AS(load_environment(R"({
    "nodes":[{"id":3,"x":0,"y":0,"kind":"plain"},{"id":3,"x":1,"y":0,"kind":"plain"}],
    "edges":[]})"),
                  ConsistencyError);

  // self-loop and duplicate edge
  CHECK_THROWS_AS(make_environment({node(0, 0, 0), node(1, 1, 0)}, {{0, 0}}), ConsistencyError);
  CHECK_THROWS_AS(make_environment({node(0, 0, 0), node(1, 1, 0)}, {{0, 1}, {1, 0}}),
                  ConsistencyError);

  // disconnected graph
  CHECK_THROWS_AS(make_environment({node(0, 0, 0), node(1, 1, 0), node(2, 2, 0), node(3, 3, 0)},
                                   {{0, 1}, {2, 3}}),
                  ConsistencyError);

  // unknown kind
  CHECK_THROWS_AS(load_environment(R"({
    "nodes":[{"id":0,"x":0,"y":0,"kind":"garage"}],"edges":[]})"),
                  ParseError);

  // non-finite coordinates
  CHECK_THROWS_AS(make_environment({node(0, std::nan(""), 0), node(1, 1, 0)}, {{0, 1}}),
                  ConsistencyError);
}

TEST_CASE("two triangles sharing a node decompose into two components") {
  EnvironmentGraph g = two_triangles();
  auto comps = biconnected_components(g);
  REQUIRE(comps.size() == 2);
  std::vector<NodeIndex> inter;
  std::set_intersection(comps[0].begin(), comps[0].end(), comps[1].begin(), comps[1].end(),
                        std::back_inserter(inter));
  CHECK(inter == std::vector<NodeIndex>{g.index_of(2)});
  CHECK(comps == oracle::components_by_enumeration(g));
}

TEST_CASE("a path graph has no components at all") {
  EnvironmentGraph g = path_env(5);
  CHECK(biconnected_components(g).empty());
  CHECK(g.main_nodes.empty());
}

TEST_CASE("component intersection check") {
  CHECK(check_component_intersections({{0, 1, 2}, {2, 3, 4}}));
  CHECK_FALSE(check_component_intersections({{0, 1, 2, 3}, {2, 3, 4}}));  // hand-built violation
  EnvironmentGraph g = load_environment_file(data_file("env4.json"));
  CHECK(check_component_intersections(biconnected_components(g)));
}

TEST_CASE("marginal classification finds pendant trees") {
  // triangle {0,1,2} with a two-node pendant path 2-3-4
  EnvironmentGraph g = make_environment(
      {node(0, 0, 0), node(1, 10, 0), node(2, 5, 8), node(3, 5, 18), node(4, 5, 28)},
      {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}});
  auto cls = classify_marginal_zone(g);
  REQUIRE(cls.trees.size() == 1);
  CHECK(cls.trees[0].root == g.index_of(2));
  CHECK(cls.marginal_nodes.size() == 2);
}

TEST_CASE("a marginal path bridging two cycles violates SC2") {
  // two triangles joined by a two-edge path through node 5
  EnvironmentGraph g = make_environment(
      {node(0, 0, 0), node(1, 10, 0), node(2, 5, 8), node(3, 30, 0), node(4, 40, 0),
       node(5, 20, 4), node(6, 35, 8)},
      {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {3, 6}, {4, 6}, {2, 5}, {5, 3}});
  CHECK_THROWS_AS(classify_marginal_zone(g), Sc2Error);
  ValidationReport r = validate(g, 1);
  CHECK_FALSE(r.sc1.pass);  // the two components are not joined by main edges
  CHECK_FALSE(r.sc2.pass);
}

TEST_CASE("graph without pendants classifies to an empty tree list") {
  EnvironmentGraph g = cycle_env(6);
  auto cls = classify_marginal_zone(g);
  CHECK(cls.trees.empty());
  CHECK(cls.roots.empty());
  CHECK(cls.marginal_nodes.empty());
}

TEST_CASE("agent-count condition and efficiency warning") {
  EnvironmentGraph g = load_environment_file(data_file("env4.json"));
  ValidationReport r8 = validate(g, 8);
  CHECK(r8.ac1.pass);
  CHECK(r8.open_node_margin == 2);
  CHECK(r8.efficiency_warning);

  ValidationReport r9 = validate(g, 9);
  CHECK_FALSE(r9.ac1.pass);

  ValidationReport r5 = validate(g, 5);
  CHECK(r5.ac1.pass);
  CHECK_FALSE(r5.efficiency_warning);  // 2*5 == 10 is not more than half open
}

TEST_CASE("parking rules of SC3") {
  // tree mixing a parking node and a task endpoint
  EnvironmentGraph mixed = make_environment(
      {node(0, 0, 0), node(1, 10, 0), node(2, 5, 8), node(3, 5, 18),
       node(4, 0, 26, NodeKind::Parking), node(5, 10, 26, NodeKind::TaskEndpoint)},
      {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {3, 5}});
  CHECK_FALSE(validate(mixed, 1).sc3.pass);

  // parking node that is not an end node
  EnvironmentGraph inner = make_environment(
      {node(0, 0, 0), node(1, 10, 0), node(2, 5, 8), node(3, 5, 18, NodeKind::Parking),
       node(4, 5, 28)},
      {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}});
  CHECK_FALSE(validate(inner, 1).sc3.pass);

  // parking node inside the main area
  EnvironmentGraph in_main = make_environment(
      {node(0, 0, 0), node(1, 10, 0), node(2, 5, 8, NodeKind::Parking)},
      {{0, 1}, {1, 2}, {0, 2}});
  CHECK_FALSE(validate(in_main, 1).sc3.pass);

  CHECK(validate(load_environment_file(data_file("env1.json")), 40).sc3.pass);
}

TEST_CASE("decomposition matches the enumeration oracle on random graphs") {
  Rng rng(2024);
  for (int it = 0; it < 60; ++it) {
    EnvironmentGraph g = oracle::random_connected_graph(rng, 9);
    auto got = biconnected_components(g);
    auto want = oracle::components_by_enumeration(g);
    CHECK(got == want);
    CHECK(check_component_intersections(got));
  }
}

TEST_CASE("derived fields partition the node set") {
  Rng rng(77);
  for (int it = 0; it < 40; ++it) {
    EnvironmentGraph g = oracle::random_valid_environment(rng, 24);
    size_t main_count = g.main_nodes.size();
    size_t marginal_count = g.marginal_nodes.size();
    CHECK(main_count + marginal_count == g.nodes.size());
    for (NodeIndex v : g.main_nodes) CHECK(g.is_main(v));
    for (NodeIndex v : g.marginal_nodes) CHECK_FALSE(g.is_main(v));
    for (const TreeArea& tree : g.trees) {
      CHECK(g.is_main(tree.root));
      for (NodeIndex v : tree.nodes) CHECK_FALSE(g.is_main(v));
    }
    CHECK(g.sc2_violations.empty());
  }
}

TEST_CASE("validate is pure") {
  EnvironmentGraph g = load_environment_file(data_file("env1.json"));
  ValidationReport a = validate(g, 22);
  ValidationReport b = validate(g, 22);
  CHECK(a.sc1.pass == b.sc1.pass);
  CHECK(a.sc1.detail == b.sc1.detail);
  CHECK(a.open_node_margin == b.open_node_margin);
  CHECK(a.efficiency_warning == b.efficiency_warning);
}

TEST_CASE("bundled environments carry the advertised endpoint counts") {
  EnvironmentGraph e1 = load_environment_file(data_file("env1.json"));
  int endpoints = 0, parking = 0, endpoint_leaves_in_trees = 0;
  for (int v = 0; v < static_cast<int>(e1.nodes.size()); ++v) {
    endpoints += e1.nodes[v].is_task_endpoint();
    parking += e1.nodes[v].is_parking();
    if (e1.nodes[v].is_task_endpoint())
      endpoint_leaves_in_trees += !e1.is_main(v) && e1.degree(v) == 1;
  }
  CHECK(endpoints == 10);
  CHECK(parking == 40);
  CHECK(endpoint_leaves_in_trees == 10);  // endpoints sit at tree ends

  EnvironmentGraph e2 = load_environment_file(data_file("env2.json"));
  int main_endpoints = 0, parking2 = 0;
  for (int v = 0; v < static_cast<int>(e2.nodes.size()); ++v) {
    if (e2.nodes[v].is_task_endpoint()) main_endpoints += e2.is_main(v);
    parking2 += e2.nodes[v].is_parking();
  }
  CHECK(main_endpoints == 10);  // endpoints live inside the main area
  CHECK(parking2 == 40);

  EnvironmentGraph e4 = load_environment_file(data_file("env4.json"));
  for (const Node& n : e4.nodes) CHECK(n.is_task_endpoint());
}

TEST_CASE("environment save/load round trip") {
  EnvironmentGraph g = load_environment_file(data_file("env1.json"));
  EnvironmentGraph h = load_environment(save_environment(g));
  CHECK(g.nodes.size() == h.nodes.size());
  CHECK(g.edges.size() == h.edges.size());
  CHECK(g.main_nodes == h.main_nodes);
  CHECK(g.marginal_nodes == h.marginal_nodes);
}
