#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "burstloc/inp_model.hpp"

namespace burstloc {

/// A single burst to inject: where along which pipe, when, and how hard.
struct BurstScenario {
  std::string pipe;
  double position = 0.5;       // fraction along the pipe from its start node, (0,1)
  double start_time_s = 10.0;
  double magnitude_m = 15.0;   // eventual head drop at the orifice
  double wave_speed_ms = 1200.0;
};

struct TraceConfig {
  double capture_interval_s = 0.2;
  double duration_s = 40.0;
  double noise_std_m = 0.01;
  double attenuation_per_m = 5e-4;  // exponential decay of the drop with distance
  double settle_time_s = 2.0;      // first-order approach to the post-burst level
  unsigned long long rng_seed = 0;
};

/// One timestamp's readings from the pressure meters.
struct PressureFrame {
  double timestamp_s = 0.0;
  std::map<std::string, double> readings;  // node id -> pressure head, meters
  bool complete = true;                    // every metered junction reported

  friend bool operator==(const PressureFrame&, const PressureFrame&) = default;
};

/// Replaces `pipe` with two segments of length position*L and L-position*L
/// joined at a fresh junction `<pipe>_burst` (the orifice). The input model is
/// left untouched; returns the new model and the orifice node id.
std::pair<NetworkModel, std::string> split_pipe(const NetworkModel& model,
                                                const std::string& pipe, double position);

/// Reservoirs read their head; junctions read the nearest reservoir's head
/// minus gradient times the shortest-path distance to it, floored.
double steady_pressure(const NetworkModel& model, const std::string& node,
                       double gradient_m_per_m = 0.005, double floor_m = 10.0);

std::map<std::string, double> steady_pressures(const NetworkModel& model,
                                               double gradient_m_per_m = 0.005,
                                               double floor_m = 10.0);

/// Orifice node id plus shortest-path distance from the orifice to every node,
/// over the split network.
struct BurstGeometry {
  std::string orifice;
  std::map<std::string, double> distance_m;
};

BurstGeometry burst_geometry(const NetworkModel& model, const BurstScenario& scenario);

/// Synthetic wavefront traces for the scenario. Node n sits at distance d
/// from the orifice; it reads its steady pressure until the front arrives at
/// start_time + d/wave_speed, then drops toward steady - magnitude *
/// exp(-attenuation*d) with the configured settle time. Gaussian noise is
/// added per node per frame when noise_std > 0. Readings cover the model's
/// junctions (the metered set); identical inputs give bit-identical traces.
std::vector<PressureFrame> generate_trace(const NetworkModel& model, const BurstScenario& scenario,
                                          const TraceConfig& cfg);

/// Trace CSV: header `time,<node>,...`, one row per frame, empty cell for a
/// missing reading, LF line endings. Values round-trip exactly.
void write_trace_csv(const std::vector<PressureFrame>& frames,
                     const std::vector<std::string>& node_order, std::ostream& out);

std::string trace_csv(const std::vector<PressureFrame>& frames,
                      const std::vector<std::string>& node_order);

std::vector<PressureFrame> parse_trace_csv(std::string_view text);

std::vector<PressureFrame> load_replay(const std::string& path);

/// Column order of a trace CSV header.
std::vector<std::string> trace_csv_nodes(std::string_view text);

}  // namespace burstloc
