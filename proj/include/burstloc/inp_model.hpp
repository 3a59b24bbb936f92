#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "burstloc/errors.hpp"

namespace burstloc {

struct Junction {
  std::string id;
  double elevation_m = 0.0;
  double base_demand_m3s = 0.0;

  friend bool operator==(const Junction&, const Junction&) = default;
};

struct Reservoir {
  std::string id;
  double head_m = 0.0;

  friend bool operator==(const Reservoir&, const Reservoir&) = default;
};

struct Pipe {
  std::string id;
  std::string start;
  std::string end;
  double length_m = 0.0;
  double diameter_m = 0.0;
  double roughness = 0.0;

  friend bool operator==(const Pipe&, const Pipe&) = default;
};

/// Static description of a water distribution network: junctions, reservoirs
/// and the pipes joining them. Immutable once built; safe to share across
/// threads.
struct NetworkModel {
  std::vector<Junction> junctions;
  std::vector<Reservoir> reservoirs;
  std::vector<Pipe> pipes;

  bool has_node(const std::string& id) const;
  const Pipe* find_pipe(const std::string& id) const;
  /// All node ids (junctions then reservoirs) in declaration order.
  std::vector<std::string> node_ids() const;
  /// Junction ids in declaration order (the metered set).
  std::vector<std::string> junction_ids() const;

  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;
};

/// Signed flow rate per pipe, m^3/s; positive means start -> end.
struct FlowField {
  std::map<std::string, double> flows;
};

struct DirectedEdge {
  std::string link;
  std::string from;
  std::string to;
  double weight = 1.0;

  friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

/// Flow-oriented view of the network: one edge per pipe, oriented along the
/// flow sign, all weights 1. Immutable once built.
class DirectedNetworkGraph {
 public:
  DirectedNetworkGraph() = default;
  DirectedNetworkGraph(std::vector<std::string> nodes, std::vector<DirectedEdge> edges);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<DirectedEdge>& edges() const { return edges_; }
  bool has_node(const std::string& id) const { return node_set_.count(id) != 0; }
  bool has_edge(const std::string& from, const std::string& to) const;

  const std::set<std::string>& in_neighbors(const std::string& node) const;
  const std::set<std::string>& out_neighbors(const std::string& node) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<DirectedEdge> edges_;
  std::set<std::string> node_set_;
  std::map<std::string, std::set<std::string>> in_;
  std::map<std::string, std::set<std::string>> out_;
};

/// Parses the supported INP subset: [JUNCTIONS] `id elev demand`,
/// [RESERVOIRS] `id head`, [PIPES] `id node1 node2 length diameter roughness`.
/// [TITLE], [COORDINATES] and [OPTIONS] are skipped; any other section is
/// skipped with a note appended to `warnings`. `;` starts a comment, section
/// headers are case-insensitive, CRLF is accepted.
NetworkModel parse_inp(std::string_view text, std::vector<std::string>* warnings = nullptr);

NetworkModel load_inp(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Canonical text form of the model; parse_inp(serialize_inp(m)) == m.
std::string serialize_inp(const NetworkModel& model);

/// Orients every pipe away from the reservoirs: flow is +1 when the declared
/// start node is at most as many hops from the nearest reservoir as the end
/// node, -1 otherwise.
FlowField default_flow_field(const NetworkModel& model);

/// One edge per pipe; direction equals the declared start->end order when the
/// pipe's flow is >= 0 and is reversed when it is negative. Weight is 1
/// either way.
DirectedNetworkGraph build_directed_graph(const NetworkModel& model, const FlowField& flows);

std::set<std::string> predecessors(const DirectedNetworkGraph& graph, const std::string& node);
std::set<std::string> successors(const DirectedNetworkGraph& graph, const std::string& node);

/// `link_id,from,to` rows in edge declaration order, with header.
std::string edge_list_csv(const DirectedNetworkGraph& graph);

/// Shortest-path distance in meters from any of `sources` to every reachable
/// node, over the undirected pipe network.
std::map<std::string, double> shortest_path_m(const NetworkModel& model,
                                              const std::vector<std::string>& sources);

}  // namespace burstloc
