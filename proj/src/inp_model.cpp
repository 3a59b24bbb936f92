#include "burstloc/inp_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace burstloc {

namespace {

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_num(const std::string& tok, int line_no, const std::string& what) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw MalformedSection("line " + std::to_string(line_no) + ": non-numeric " + what + " '" +
                           tok + "'");
  }
  return v;
}

std::string fmt_num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

enum class Section { none, title, junctions, reservoirs, pipes, coordinates, options, skipped };

}  // namespace

bool NetworkModel::has_node(const std::string& id) const {
  for (const auto& j : junctions)
    if (j.id == id) return true;
  for (const auto& r : reservoirs)
    if (r.id == id) return true;
  return false;
}

const Pipe* NetworkModel::find_pipe(const std::string& id) const {
  for (const auto& p : pipes)
    if (p.id == id) return &p;
  return nullptr;
}

std::vector<std::string> NetworkModel::node_ids() const {
  std::vector<std::string> out;
  out.reserve(junctions.size() + reservoirs.size());
  for (const auto& j : junctions) out.push_back(j.id);
  for (const auto& r : reservoirs) out.push_back(r.id);
  return out;
}

std::vector<std::string> NetworkModel::junction_ids() const {
  std::vector<std::string> out;
  out.reserve(junctions.size());
  for (const auto& j : junctions) out.push_back(j.id);
  return out;
}

NetworkModel parse_inp(std::string_view text, std::vector<std::string>* warnings) {
  NetworkModel model;
  Section section = Section::none;
  bool saw_junctions = false, saw_reservoirs = false, saw_pipes = false;

  std::set<std::string> node_ids;
  std::set<std::string> link_ids;
  std::vector<std::pair<size_t, int>> pipe_lines;  // pipe index -> source line

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string line(raw);
    if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      auto close = line.find(']');
      if (close == std::string::npos)
        throw MalformedSection("line " + std::to_string(line_no) + ": unterminated section header");
      const std::string name = upper(trim(line.substr(1, close - 1)));
      if (name == "TITLE") {
        section = Section::title;
      } else if (name == "JUNCTIONS") {
        section = Section::junctions;
        saw_junctions = true;
      } else if (name == "RESERVOIRS") {
        section = Section::reservoirs;
        saw_reservoirs = true;
      } else if (name == "PIPES") {
        section = Section::pipes;
        saw_pipes = true;
      } else if (name == "COORDINATES") {
        section = Section::coordinates;
      } else if (name == "OPTIONS") {
        section = Section::options;
      } else {
        section = Section::skipped;
        if (warnings)
          warnings->push_back("line " + std::to_string(line_no) + ": ignoring unknown section [" +
                              name + "]");
      }
      continue;
    }

    switch (section) {
      case Section::none:
        throw MalformedSection("line " + std::to_string(line_no) +
                               ": data before any section header");
      case Section::title:
      case Section::coordinates:
      case Section::options:
      case Section::skipped:
        break;
      case Section::junctions: {
        auto tok = split_ws(line);
        if (tok.size() != 3)
          throw MalformedSection("line " + std::to_string(line_no) +
                                 ": junction row needs `id elevation demand`");
        if (!node_ids.insert(tok[0]).second)
          throw DuplicateId("line " + std::to_string(line_no) + ": duplicate node id '" + tok[0] +
                            "'");
        model.junctions.push_back({tok[0], parse_num(tok[1], line_no, "elevation"),
                                   parse_num(tok[2], line_no, "demand")});
        break;
      }
      case Section::reservoirs: {
        auto tok = split_ws(line);
        if (tok.size() != 2)
          throw MalformedSection("line " + std::to_string(line_no) +
                                 ": reservoir row needs `id head`");
        if (!node_ids.insert(tok[0]).second)
          throw DuplicateId("line " + std::to_string(line_no) + ": duplicate node id '" + tok[0] +
                            "'");
        model.reservoirs.push_back({tok[0], parse_num(tok[1], line_no, "head")});
        break;
      }
      case Section::pipes: {
        auto tok = split_ws(line);
        if (tok.size() != 6)
          throw MalformedSection("line " + std::to_string(line_no) +
                                 ": pipe row needs `id node1 node2 length diameter roughness`");
        if (!link_ids.insert(tok[0]).second)
          throw DuplicateId("line " + std::to_string(line_no) + ": duplicate link id '" + tok[0] +
                            "'");
        Pipe p{tok[0],
               tok[1],
               tok[2],
               parse_num(tok[3], line_no, "length"),
               parse_num(tok[4], line_no, "diameter"),
               parse_num(tok[5], line_no, "roughness")};
        if (p.length_m <= 0.0)
          throw MalformedSection("line " + std::to_string(line_no) + ": pipe '" + p.id +
                                 "' length must be positive");
        if (p.diameter_m <= 0.0)
          throw MalformedSection("line " + std::to_string(line_no) + ": pipe '" + p.id +
                                 "' diameter must be positive");
        pipe_lines.emplace_back(model.pipes.size(), line_no);
        model.pipes.push_back(std::move(p));
        break;
      }
    }
  }

  if (!saw_junctions) throw MalformedSection("missing required section [JUNCTIONS]");
  if (!saw_reservoirs) throw MalformedSection("missing required section [RESERVOIRS]");
  if (!saw_pipes) throw MalformedSection("missing required section [PIPES]");
  if (model.reservoirs.empty()) throw MalformedSection("no [RESERVOIRS] entries");

  for (const auto& [idx, ln] : pipe_lines) {
    const Pipe& p = model.pipes[idx];
    for (const std::string* endp : {&p.start, &p.end}) {
      if (!node_ids.count(*endp))
        throw DanglingEndpoint("line " + std::to_string(ln) + ": pipe '" + p.id +
                               "' references unknown node '" + *endp + "'");
    }
  }
  return model;
}

NetworkModel load_inp(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open INP file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_inp(buf.str(), warnings);
}

std::string serialize_inp(const NetworkModel& model) {
  std::ostringstream out;
  out << "[JUNCTIONS]\n";
  for (const auto& j : model.junctions)
    out << j.id << "  " << fmt_num(j.elevation_m) << "  " << fmt_num(j.base_demand_m3s) << "\n";
  out << "\n[RESERVOIRS]\n";
  for (const auto& r : model.reservoirs) out << r.id << "  " << fmt_num(r.head_m) << "\n";
  out << "\n[PIPES]\n";
  for (const auto& p : model.pipes)
    out << p.id << "  " << p.start << "  " << p.end << "  " << fmt_num(p.length_m) << "  "
        << fmt_num(p.diameter_m) << "  " << fmt_num(p.roughness) << "\n";
  return out.str();
}

DirectedNetworkGraph::DirectedNetworkGraph(std::vector<std::string> nodes,
                                           std::vector<DirectedEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (const auto& n : nodes_) {
    node_set_.insert(n);
    in_[n];
    out_[n];
  }
  for (const auto& e : edges_) {
    out_[e.from].insert(e.to);
    in_[e.to].insert(e.from);
  }
}

bool DirectedNetworkGraph::has_edge(const std::string& from, const std::string& to) const {
  auto it = out_.find(from);
  return it != out_.end() && it->second.count(to) != 0;
}

const std::set<std::string>& DirectedNetworkGraph::in_neighbors(const std::string& node) const {
  auto it = in_.find(node);
  if (it == in_.end()) throw UnknownNode("unknown node '" + node + "'");
  return it->second;
}

const std::set<std::string>& DirectedNetworkGraph::out_neighbors(const std::string& node) const {
  auto it = out_.find(node);
  if (it == out_.end()) throw UnknownNode("unknown node '" + node + "'");
  return it->second;
}

FlowField default_flow_field(const NetworkModel& model) {
  // Breadth-first hop count from the reservoirs over the undirected network.
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& p : model.pipes) {
    adj[p.start].push_back(p.end);
    adj[p.end].push_back(p.start);
  }
  std::map<std::string, long> hops;
  std::deque<std::string> frontier;
  for (const auto& r : model.reservoirs) {
    hops[r.id] = 0;
    frontier.push_back(r.id);
  }
  while (!frontier.empty()) {
    std::string u = frontier.front();
    frontier.pop_front();
    for (const auto& v : adj[u]) {
      if (!hops.count(v)) {
        hops[v] = hops[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  const long unreachable = std::numeric_limits<long>::max();
  auto hop = [&](const std::string& n) {
    auto it = hops.find(n);
    return it == hops.end() ? unreachable : it->second;
  };
  FlowField field;
  for (const auto& p : model.pipes)
    field.flows[p.id] = hop(p.start) <= hop(p.end) ? 1.0 : -1.0;
  return field;
}

DirectedNetworkGraph build_directed_graph(const NetworkModel& model, const FlowField& flows) {
  std::vector<DirectedEdge> edges;
  edges.reserve(model.pipes.size());
  for (const auto& p : model.pipes) {
    auto it = flows.flows.find(p.id);
    if (it == flows.flows.end()) throw MissingFlow("no flow entry for pipe '" + p.id + "'");
    if (it->second >= 0.0)
      edges.push_back({p.id, p.start, p.end, 1.0});
    else
      edges.push_back({p.id, p.end, p.start, 1.0});
  }
  return DirectedNetworkGraph(model.node_ids(), std::move(edges));
}

std::set<std::string> predecessors(const DirectedNetworkGraph& graph, const std::string& node) {
  return graph.in_neighbors(node);
}

std::set<std::string> successors(const DirectedNetworkGraph& graph, const std::string& node) {
  return graph.out_neighbors(node);
}

std::string edge_list_csv(const DirectedNetworkGraph& graph) {
  std::ostringstream out;
  out << "link_id,from,to\n";
  for (const auto& e : graph.edges()) out << e.link << ',' << e.from << ',' << e.to << '\n';
  return out.str();
}

std::map<std::string, double> shortest_path_m(const NetworkModel& model,
                                              const std::vector<std::string>& sources) {
  std::map<std::string, std::vector<std::pair<std::string, double>>> adj;
  for (const auto& p : model.pipes) {
    adj[p.start].emplace_back(p.end, p.length_m);
    adj[p.end].emplace_back(p.start, p.length_m);
  }
  std::map<std::string, double> dist;
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (const auto& s : sources) {
    if (!model.has_node(s)) throw UnknownNode("unknown node '" + s + "'");
    dist[s] = 0.0;
    pq.push({0.0, s});
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (const auto& [v, w] : adj[u]) {
      double nd = d + w;
      auto it = dist.find(v);
      if (it == dist.end() || nd < it->second) {
        dist[v] = nd;
        pq.push({nd, v});
      }
    }
  }
  return dist;
}

}  // namespace burstloc
