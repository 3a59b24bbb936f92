#include "burstloc/transient.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

namespace burstloc {

namespace {

std::string fmt_num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_cell(const std::string& tok, int line_no, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw MalformedRow("line " + std::to_string(line_no) + ": non-numeric " + what + " '" + tok +
                       "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  size_t pos = 0;
  for (;;) {
    size_t c = line.find(',', pos);
    if (c == std::string::npos) {
      cells.push_back(line.substr(pos));
      break;
    }
    cells.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
  return cells;
}

// Deterministic standard normal (Box-Muller on explicit 53-bit uniforms), so
// traces do not depend on the standard library's distribution internals.
class GaussianSource {
 public:
  explicit GaussianSource(unsigned long long seed) : rng_(seed) {}

  double operator()() {
    const double u1 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 rng_;
};

void validate_scenario(const NetworkModel& model, const BurstScenario& sc) {
  if (!model.find_pipe(sc.pipe)) throw UnknownLink("unknown pipe '" + sc.pipe + "'");
  if (!(sc.position > 0.0 && sc.position < 1.0))
    throw PositionOutOfRange("burst position must lie strictly inside (0,1)");
  if (!(sc.start_time_s >= 0.0)) throw InvalidConfig("burst start time must be >= 0");
  if (!(sc.magnitude_m > 0.0)) throw InvalidConfig("burst magnitude must be positive");
  if (!(sc.wave_speed_ms > 0.0)) throw InvalidConfig("wave speed must be positive");
}

void validate_config(const TraceConfig& cfg) {
  if (!(cfg.capture_interval_s > 0.0)) throw InvalidConfig("capture interval must be positive");
  if (!(cfg.duration_s > cfg.capture_interval_s))
    throw InvalidConfig("duration must exceed the capture interval");
  if (!(cfg.noise_std_m >= 0.0)) throw InvalidConfig("noise std must be >= 0");
  if (!(cfg.attenuation_per_m >= 0.0)) throw InvalidConfig("attenuation must be >= 0");
  if (!(cfg.settle_time_s > 0.0)) throw InvalidConfig("settle time must be positive");
}

}  // namespace

std::pair<NetworkModel, std::string> split_pipe(const NetworkModel& model, const std::string& pipe,
                                                double position) {
  const Pipe* target = model.find_pipe(pipe);
  if (!target) throw UnknownLink("unknown pipe '" + pipe + "'");
  if (!(position > 0.0 && position < 1.0))
    throw PositionOutOfRange("split position must lie strictly inside (0,1)");

  const std::string orifice = pipe + "_burst";
  const std::string seg_a = pipe + "_a";
  const std::string seg_b = pipe + "_b";
  if (model.has_node(orifice)) throw DuplicateId("node id '" + orifice + "' already in use");
  for (const auto& id : {seg_a, seg_b})
    if (model.find_pipe(id)) throw DuplicateId("link id '" + id + "' already in use");

  NetworkModel out = model;
  const double total = target->length_m;
  double len_a = position * total;
  double len_b = total - len_a;
  // Nudge the near segment (finer grid) until the two lengths add back to the
  // original exactly; rounding can otherwise leave the sum one step off.
  for (int i = 0; i < 64 && len_a + len_b != total; ++i) {
    len_a = std::nextafter(len_a, len_a + len_b > total ? 0.0 : total);
    len_b = total - len_a;
  }
  if (!(len_a > 0.0) || !(len_b > 0.0) || len_a + len_b != total)
    throw PositionOutOfRange("split position degenerates a segment for pipe '" + pipe + "'");

  auto it = std::find_if(out.pipes.begin(), out.pipes.end(),
                         [&](const Pipe& p) { return p.id == pipe; });
  const Pipe original = *it;
  *it = Pipe{seg_a, original.start, orifice, len_a, original.diameter_m, original.roughness};
  out.pipes.insert(it + 1, Pipe{seg_b, orifice, original.end, len_b, original.diameter_m,
                                original.roughness});
  out.junctions.push_back({orifice, 0.0, 0.0});
  return {std::move(out), orifice};
}

std::map<std::string, double> steady_pressures(const NetworkModel& model, double gradient_m_per_m,
                                               double floor_m) {
  // Nearest reservoir by path length, tracking which one it is so its head
  // anchors the gradient.
  std::map<std::string, std::vector<std::pair<std::string, double>>> adj;
  for (const auto& p : model.pipes) {
    adj[p.start].emplace_back(p.end, p.length_m);
    adj[p.end].emplace_back(p.start, p.length_m);
  }
  std::map<std::string, std::pair<double, double>> best;  // node -> (dist, source head)
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (const auto& r : model.reservoirs) {
    best[r.id] = {0.0, r.head_m};
    pq.push({0.0, r.id});
  }
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > best[u].first) continue;
    for (const auto& [v, w] : adj[u]) {
      const double nd = d + w;
      auto it = best.find(v);
      if (it == best.end() || nd < it->second.first) {
        best[v] = {nd, best[u].second};
        pq.push({nd, v});
      }
    }
  }

  std::map<std::string, double> out;
  for (const auto& r : model.reservoirs) out[r.id] = r.head_m;
  for (const auto& j : model.junctions) {
    auto it = best.find(j.id);
    if (it == best.end()) {
      out[j.id] = floor_m;  // disconnected from every reservoir
    } else {
      out[j.id] = std::max(floor_m, it->second.second - gradient_m_per_m * it->second.first);
    }
  }
  return out;
}

double steady_pressure(const NetworkModel& model, const std::string& node, double gradient_m_per_m,
                       double floor_m) {
  if (!model.has_node(node)) throw UnknownNode("unknown node '" + node + "'");
  return steady_pressures(model, gradient_m_per_m, floor_m).at(node);
}

BurstGeometry burst_geometry(const NetworkModel& model, const BurstScenario& scenario) {
  validate_scenario(model, scenario);
  auto [split, orifice] = split_pipe(model, scenario.pipe, scenario.position);
  BurstGeometry geom;
  geom.orifice = orifice;
  geom.distance_m = shortest_path_m(split, {orifice});
  return geom;
}

std::vector<PressureFrame> generate_trace(const NetworkModel& model, const BurstScenario& scenario,
                                          const TraceConfig& cfg) {
  validate_scenario(model, scenario);
  validate_config(cfg);

  auto [split, orifice] = split_pipe(model, scenario.pipe, scenario.position);
  const auto distance = shortest_path_m(split, {orifice});
  const auto steady = steady_pressures(split);
  const auto metered = model.junction_ids();  // the orifice itself carries no meter

  const auto nframes =
      static_cast<Eigen::Index>(std::floor(cfg.duration_s / cfg.capture_interval_s + 1e-9)) + 1;
  Eigen::ArrayXd times(nframes);
  for (Eigen::Index k = 0; k < nframes; ++k)
    times[k] = static_cast<double>(k) * cfg.capture_interval_s;

  Eigen::MatrixXd readings(nframes, static_cast<Eigen::Index>(metered.size()));
  for (size_t j = 0; j < metered.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    auto dist_it = distance.find(metered[j]);
    if (dist_it == distance.end()) {
      // unreachable from the orifice: the front never arrives
      readings.col(col).setConstant(steady.at(metered[j]));
      continue;
    }
    const double d = dist_it->second;
    const double arrival = scenario.start_time_s + d / scenario.wave_speed_ms;
    const double drop = scenario.magnitude_m * std::exp(-cfg.attenuation_per_m * d);
    const Eigen::ArrayXd elapsed = (times - arrival).max(0.0);
    readings.col(col) = steady.at(metered[j]) - drop * (1.0 - (-elapsed / cfg.settle_time_s).exp());
  }

  if (cfg.noise_std_m > 0.0) {
    // Frame-major, node declaration order within a frame.
    GaussianSource gauss(cfg.rng_seed);
    for (Eigen::Index k = 0; k < nframes; ++k)
      for (Eigen::Index j = 0; j < readings.cols(); ++j)
        readings(k, j) += cfg.noise_std_m * gauss();
  }

  std::vector<PressureFrame> frames;
  frames.reserve(static_cast<size_t>(nframes));
  for (Eigen::Index k = 0; k < nframes; ++k) {
    PressureFrame f;
    f.timestamp_s = times[k];
    for (size_t j = 0; j < metered.size(); ++j)
      f.readings[metered[j]] = readings(k, static_cast<Eigen::Index>(j));
    f.complete = true;
    frames.push_back(std::move(f));
  }
  return frames;
}

void write_trace_csv(const std::vector<PressureFrame>& frames,
                     const std::vector<std::string>& node_order, std::ostream& out) {
  out << "time";
  for (const auto& n : node_order) out << ',' << n;
  out << '\n';
  for (const auto& f : frames) {
    out << fmt_num(f.timestamp_s);
    for (const auto& n : node_order) {
      out << ',';
      auto it = f.readings.find(n);
      if (it != f.readings.end()) out << fmt_num(it->second);
    }
    out << '\n';
  }
}

std::string trace_csv(const std::vector<PressureFrame>& frames,
                      const std::vector<std::string>& node_order) {
  std::ostringstream out;
  write_trace_csv(frames, node_order, out);
  return out.str();
}

std::vector<std::string> trace_csv_nodes(std::string_view text) {
  size_t nl = text.find('\n');
  std::string header(text.substr(0, nl == std::string_view::npos ? text.size() : nl));
  if (!header.empty() && header.back() == '\r') header.pop_back();
  auto cells = split_csv(header);
  if (cells.empty() || cells[0] != "time")
    throw MalformedRow("line 1: trace header must start with 'time'");
  return {cells.begin() + 1, cells.end()};
}

std::vector<PressureFrame> parse_trace_csv(std::string_view text) {
  const auto nodes = trace_csv_nodes(text);
  const size_t ncols = nodes.size() + 1;

  std::vector<PressureFrame> frames;
  int line_no = 1;
  size_t pos = text.find('\n');
  pos = pos == std::string_view::npos ? text.size() : pos + 1;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    auto cells = split_csv(line);
    if (cells.size() != ncols)
      throw MalformedRow("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(ncols) + " cells, got " + std::to_string(cells.size()));
    PressureFrame f;
    f.timestamp_s = parse_cell(cells[0], line_no, "timestamp");
    for (size_t j = 0; j < nodes.size(); ++j) {
      if (cells[j + 1].empty()) continue;  // missing reading
      f.readings[nodes[j]] = parse_cell(cells[j + 1], line_no, "pressure");
    }
    f.complete = f.readings.size() == nodes.size();
    frames.push_back(std::move(f));
  }

  for (size_t k = 1; k < frames.size(); ++k) {
    if (!(frames[k].timestamp_s > frames[k - 1].timestamp_s))
      throw NonMonotoneTime("timestamps must be strictly increasing (frame " + std::to_string(k) +
                            ")");
  }
  if (frames.size() >= 3) {
    const double dt = frames[1].timestamp_s - frames[0].timestamp_s;
    for (size_t k = 2; k < frames.size(); ++k) {
      const double step = frames[k].timestamp_s - frames[k - 1].timestamp_s;
      if (std::abs(step - dt) > 1e-9)
        throw NonUniformSpacing("frame spacing varies at frame " + std::to_string(k));
    }
  }
  return frames;
}

std::vector<PressureFrame> load_replay(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str());
}

}  // namespace burstloc
