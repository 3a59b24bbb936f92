#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "burstloc/inp_model.hpp"
#include "test_util.hpp"

using namespace burstloc;

namespace {

// Endpoint pairs of the bundled reference network, by pipe id.
const std::vector<std::tuple<std::string, std::string, std::string>> kReferenceEdges = {
    {"P1", "R1", "N3"}, {"P2", "N3", "N4"}, {"P3", "N3", "N2"}, {"P4", "N4", "N6"},
    {"P5", "N4", "N2"}, {"P6", "N2", "N5"}, {"P7", "N5", "N7"}, {"P8", "N6", "N5"},
    {"P9", "N2", "N6"}, {"1", "N7", "4"},   {"2", "5", "8"},    {"3", "1", "2"},
    {"4", "N3", "1"},   {"5", "2", "3"},    {"6", "3", "4"},    {"7", "4", "5"},
    {"8", "N2", "2"},   {"9", "N5", "3"},   {"11", "6", "7"},   {"12", "N6", "6"},
    {"13", "7", "N8"},  {"14", "N8", "8"},  {"15", "N7", "7"},  {"16", "N7", "N8"},
    {"17", "1", "N2"},
};

NetworkModel reference() { return load_inp(testutil::data_path("reference25.inp")); }

}  // namespace

TEST_CASE("parse_inp: bundled reference fixture") {
  const auto model = reference();
  CHECK(model.reservoirs.size() == 1);
  CHECK(model.junctions.size() == 15);
  CHECK(model.pipes.size() == 25);
  CHECK(model.reservoirs[0].id == "R1");
  CHECK(model.reservoirs[0].head_m == 50.0);

  REQUIRE(model.pipes.size() == kReferenceEdges.size());
  for (size_t i = 0; i < kReferenceEdges.size(); ++i) {
    const auto& [id, start, end] = kReferenceEdges[i];
    const Pipe* p = model.find_pipe(id);
    REQUIRE(p != nullptr);
    CHECK(p->start == start);
    CHECK(p->end == end);
    CHECK(p->length_m == 1000.0);
    CHECK(p->diameter_m == 0.3);
  }
  // the historical numbering skips link id 10
  CHECK(model.find_pipe("10") == nullptr);
}

TEST_CASE("parse_inp: minimal two-node network") {
  const auto model = parse_inp(
      "[JUNCTIONS]\nJ1 0 0.01\n[RESERVOIRS]\nR1 50\n[PIPES]\nP1 R1 J1 100 0.3 100\n");
  CHECK(model.junctions.size() == 1);
  CHECK(model.reservoirs.size() == 1);
  CHECK(model.pipes.size() == 1);
}

TEST_CASE("parse_inp: tolerates comments, CRLF and header case") {
  std::vector<std::string> warnings;
  const auto model = parse_inp(
      "[Title]\r\nsome title ; with comment\r\n"
      "[junctions]\r\nJ1 0 0.01 ; inline comment\r\n"
      "[RESERVOIRS]\r\nR1 50\r\n"
      "[Pipes]\r\nP1 R1 J1 100 0.3 100\r\n"
      "[FANCY]\r\nstuff 1 2\r\n",
      &warnings);
  CHECK(model.junctions.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("FANCY") != std::string::npos);
}

TEST_CASE("parse_inp: errors carry line numbers and names") {
  // pipe references undeclared node X9
  CHECK_THROWS_WITH_AS(
      parse_inp("[JUNCTIONS]\nJ1 0 0.01\n[RESERVOIRS]\nR1 50\n[PIPES]\nP1 R1 X9 100 0.3 100\n"),
      doctest::Contains("X9"), DanglingEndpoint);

  CHECK_THROWS_AS(
      parse_inp("[JUNCTIONS]\nJ1 0 0.01\nJ1 0 0.01\n[RESERVOIRS]\nR1 50\n[PIPES]\n"),
      DuplicateId);
  CHECK_THROWS_AS(
      parse_inp("[JUNCTIONS]\nJ1 0 0.01\n[RESERVOIRS]\nR1 50\n[PIPES]\nP1 R1 J1 100 0.3 100\nP1 R1 J1 100 0.3 100\n"),
      DuplicateId);

  // wrong token count, with the line number in the message
  CHECK_THROWS_WITH_AS(parse_inp("[JUNCTIONS]\nJ1 0\n"), doctest::Contains("line 2"),
                       MalformedSection);
  // non-numeric field
  CHECK_THROWS_AS(parse_inp("[JUNCTIONS]\nJ1 zero 0.01\n"), MalformedSection);
  // non-positive geometry
  CHECK_THROWS_AS(
      parse_inp("[JUNCTIONS]\nJ1 0 0.01\n[RESERVOIRS]\nR1 50\n[PIPES]\nP1 R1 J1 0 0.3 100\n"),
      MalformedSection);
  // missing sections
  CHECK_THROWS_AS(parse_inp("[JUNCTIONS]\nJ1 0 0.01\n"), MalformedSection);
  CHECK_THROWS_AS(parse_inp("data before header\n"), MalformedSection);
}

TEST_CASE("serialize/parse round trip") {
  const auto model = reference();
  CHECK(parse_inp(serialize_inp(model)) == model);

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = testutil::random_model(rng, 2 + trial % 7);
    CHECK(parse_inp(serialize_inp(m)) == m);
  }
}

TEST_CASE("build_directed_graph: orientation follows the flow sign") {
  NetworkModel m;
  m.reservoirs.push_back({"A", 50.0});
  m.junctions.push_back({"B", 0.0, 0.01});
  m.pipes.push_back({"P", "A", "B", 100.0, 0.3, 100.0});

  auto positive = build_directed_graph(m, FlowField{{{"P", 0.5}}});
  REQUIRE(positive.edges().size() == 1);
  CHECK(positive.edges()[0].from == "A");
  CHECK(positive.edges()[0].to == "B");
  CHECK(positive.edges()[0].weight == 1.0);

  auto negative = build_directed_graph(m, FlowField{{{"P", -0.3}}});
  CHECK(negative.edges()[0].from == "B");
  CHECK(negative.edges()[0].to == "A");
  CHECK(negative.edges()[0].weight == 1.0);

  auto zero = build_directed_graph(m, FlowField{{{"P", 0.0}}});
  CHECK(zero.edges()[0].from == "A");
  CHECK(zero.edges()[0].to == "B");

  CHECK_THROWS_AS(build_directed_graph(m, FlowField{}), MissingFlow);
}

TEST_CASE("reference graph: nodes, edges and adjacency") {
  const auto model = reference();
  const auto graph = build_directed_graph(model, default_flow_field(model));

  CHECK(graph.nodes().size() == 16);
  CHECK(graph.edges().size() == 25);

  // the default flow field keeps every declared orientation on this fixture
  for (const auto& [id, start, end] : kReferenceEdges) {
    bool found = false;
    for (const auto& e : graph.edges())
      if (e.link == id) {
        found = true;
        CHECK(e.from == start);
        CHECK(e.to == end);
      }
    CHECK(found);
  }

  CHECK(predecessors(graph, "N3") == std::set<std::string>{"R1"});
  CHECK(predecessors(graph, "R1").empty());
  CHECK(successors(graph, "R1") == std::set<std::string>{"N3"});
  CHECK(successors(graph, "8").empty());  // sink
  CHECK_THROWS_AS(predecessors(graph, "Z"), UnknownNode);
  CHECK_THROWS_AS(successors(graph, "Z"), UnknownNode);
}

TEST_CASE("graph orientation involution") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> flow(-2.0, 2.0);
  for (int trial = 0; trial < 250; ++trial) {
    const auto m = testutil::random_model(rng, 2 + trial % 8);
    FlowField flows;
    for (const auto& p : m.pipes) {
      double f = flow(rng);
      if (f == 0.0) f = 1.0;  // keep the sign flip well-defined
      flows.flows[p.id] = f;
    }
    FlowField negated;
    for (const auto& [id, f] : flows.flows) negated.flows[id] = -f;

    const auto g = build_directed_graph(m, flows);
    const auto gn = build_directed_graph(m, negated);
    REQUIRE(g.edges().size() == m.pipes.size());
    REQUIRE(gn.edges().size() == m.pipes.size());
    CHECK(g.nodes() == gn.nodes());
    for (size_t i = 0; i < g.edges().size(); ++i) {
      CHECK(g.edges()[i].link == gn.edges()[i].link);
      CHECK(g.edges()[i].from == gn.edges()[i].to);
      CHECK(g.edges()[i].to == gn.edges()[i].from);
      CHECK(g.edges()[i].weight == 1.0);
      CHECK(gn.edges()[i].weight == 1.0);
    }
  }
}

TEST_CASE("edge_list_csv") {
  NetworkModel m;
  m.reservoirs.push_back({"A", 50.0});
  m.junctions.push_back({"B", 0.0, 0.01});
  m.pipes.push_back({"P", "A", "B", 100.0, 0.3, 100.0});
  const auto g = build_directed_graph(m, FlowField{{{"P", 1.0}}});
  CHECK(edge_list_csv(g) == "link_id,from,to\nP,A,B\n");
}

TEST_CASE("shortest_path_m over the fixture") {
  const auto model = reference();
  const auto dist = shortest_path_m(model, {"R1"});
  CHECK(dist.at("N3") == 1000.0);
  CHECK(dist.at("N4") == 2000.0);
  CHECK(dist.at("5") == 6000.0);
  CHECK_THROWS_AS(shortest_path_m(model, {"nope"}), UnknownNode);
}
