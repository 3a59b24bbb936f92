#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "burstloc/bench.hpp"
#include "burstloc/inp_model.hpp"
#include "burstloc/localizer.hpp"
#include "burstloc/stream.hpp"
#include "burstloc/transient.hpp"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoBurst = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct SimulateOptions {
  std::string inp_path;
  std::string burst_pipe;
  double burst_position = 0.5;
  double burst_start_s = 10.0;
  double magnitude_m = 15.0;
  double wave_speed_ms = 1200.0;
  double capture_interval_s = 0.2;
  double duration_s = 40.0;
  double noise_std_m = 0.01;
  double attenuation_per_m = 5e-4;
  double settle_time_s = 2.0;
  unsigned long long seed = 0;
  std::string out_path = "trace.csv";
};

struct DetectOptions {
  std::string replay_path;
  std::string inp_path;
  std::string detector;
  double threshold = 0.0;
  double drift = 0.0;
  int interval = 5;
  std::string burst_pipe;  // simulate-inline mode
  double burst_position = 0.5;
  double burst_start_s = 10.0;
  double magnitude_m = 15.0;
  double wave_speed_ms = 1200.0;
  double capture_interval_s = 0.2;
  double duration_s = 40.0;
  double noise_std_m = 0.01;
  unsigned long long seed = 0;
  std::string pacing = "fast";
  int jobs = 1;
};

struct BenchOptions {
  std::string inp_path;
  std::string detector;
  std::string scenarios_path;
  std::string out_path = "bench_report.csv";
  std::string format = "csv";
  double burst_position = 0.5;
  double burst_start_s = 10.0;
  double duration_s = 40.0;
  double noise_std_m = 0.01;
  unsigned long long seed = 0;
  int jobs = 1;
};

void banner(const nlohmann::ordered_json& config) {
  std::cerr << "config: " << config.dump() << "\n";
}

void require_writable(const std::string& path) {
  std::ofstream probe(path, std::ios::app);
  if (!probe) throw burstloc::InvalidConfig("out path '" + path + "' is not writable");
}

burstloc::DetectorKind parse_detector(const std::string& name) {
  if (name == "cusum") return burstloc::DetectorKind::cusum;
  if (name == "shewhart") return burstloc::DetectorKind::shewhart;
  throw burstloc::InvalidConfig("--detector must be cusum or shewhart, got '" + name + "'");
}

int cmd_simulate(const SimulateOptions& opt) {
  banner({{"subcommand", "simulate"},
          {"inp", opt.inp_path},
          {"burst_pipe", opt.burst_pipe},
          {"burst_position", opt.burst_position},
          {"burst_start_s", opt.burst_start_s},
          {"magnitude_m", opt.magnitude_m},
          {"wave_speed_ms", opt.wave_speed_ms},
          {"capture_interval_s", opt.capture_interval_s},
          {"duration_s", opt.duration_s},
          {"noise_std_m", opt.noise_std_m},
          {"attenuation_per_m", opt.attenuation_per_m},
          {"settle_time_s", opt.settle_time_s},
          {"seed", opt.seed},
          {"out", opt.out_path}});

  std::vector<std::string> warnings;
  const auto model = burstloc::load_inp(opt.inp_path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (!model.find_pipe(opt.burst_pipe))
    throw burstloc::UnknownLink("unknown pipe " + opt.burst_pipe);
  require_writable(opt.out_path);

  burstloc::BurstScenario scenario{opt.burst_pipe, opt.burst_position, opt.burst_start_s,
                                   opt.magnitude_m, opt.wave_speed_ms};
  burstloc::TraceConfig cfg{opt.capture_interval_s, opt.duration_s,    opt.noise_std_m,
                            opt.attenuation_per_m, opt.settle_time_s, opt.seed};
  const auto frames = burstloc::generate_trace(model, scenario, cfg);

  std::ofstream out(opt.out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw burstloc::IoError("cannot open '" + opt.out_path + "' for writing");
  burstloc::write_trace_csv(frames, model.junction_ids(), out);
  if (!out.flush()) throw burstloc::IoError("write to '" + opt.out_path + "' failed");

  std::cout << "wrote " << frames.size() << " frames to " << opt.out_path << "\n";
  return kExitOk;
}

int cmd_detect(const DetectOptions& opt) {
  banner({{"subcommand", "detect"},
          {"replay", opt.replay_path},
          {"inp", opt.inp_path},
          {"detector", opt.detector},
          {"threshold", opt.threshold},
          {"drift", opt.drift},
          {"interval", opt.interval},
          {"burst_pipe", opt.burst_pipe},
          {"burst_start_s", opt.burst_start_s},
          {"pacing", opt.pacing},
          {"seed", opt.seed},
          {"jobs", opt.jobs}});

  if (opt.replay_path.empty() && opt.burst_pipe.empty())
    throw burstloc::InvalidConfig("need --replay or --burst-pipe (inline simulation)");
  if (opt.pacing != "fast" && opt.pacing != "realtime")
    throw burstloc::InvalidConfig("--pacing must be fast or realtime");

  std::vector<std::string> warnings;
  const auto model = burstloc::load_inp(opt.inp_path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  std::vector<burstloc::PressureFrame> frames;
  double burst_start = opt.burst_start_s;
  if (!opt.replay_path.empty()) {
    frames = burstloc::load_replay(opt.replay_path);
  } else {
    if (!model.find_pipe(opt.burst_pipe))
      throw burstloc::UnknownLink("unknown pipe " + opt.burst_pipe);
    burstloc::BurstScenario scenario{opt.burst_pipe, opt.burst_position, opt.burst_start_s,
                                     opt.magnitude_m, opt.wave_speed_ms};
    burstloc::TraceConfig cfg{opt.capture_interval_s, opt.duration_s, opt.noise_std_m, 5e-4, 2.0,
                              opt.seed};
    frames = burstloc::generate_trace(model, scenario, cfg);
  }

  // Meters are whichever junctions actually report in the trace.
  std::vector<std::string> metered;
  if (!frames.empty()) {
    for (const auto& id : model.junction_ids())
      if (frames.front().readings.count(id)) metered.push_back(id);
  }

  const auto graph = burstloc::build_directed_graph(model, burstloc::default_flow_field(model));
  burstloc::LocalizerConfig cfg{
      {parse_detector(opt.detector), opt.threshold, opt.drift}, opt.interval, metered};

  auto source = burstloc::stream(std::move(frames), opt.pacing == "realtime"
                                                        ? burstloc::Pacing::real_time
                                                        : burstloc::Pacing::as_fast_as_possible);
  const auto result = burstloc::run_pipeline(source.feed(), graph, cfg, burst_start, opt.jobs);
  if (!result) {
    std::cout << "{\"result\":\"no_burst_found\"}\n";
    return kExitNoBurst;
  }
  std::cout << result->to_json() << "\n";
  return kExitOk;
}

int cmd_bench(const BenchOptions& opt) {
  banner({{"subcommand", "bench"},
          {"inp", opt.inp_path},
          {"detector", opt.detector},
          {"scenarios", opt.scenarios_path},
          {"out", opt.out_path},
          {"format", opt.format},
          {"burst_position", opt.burst_position},
          {"burst_start_s", opt.burst_start_s},
          {"duration_s", opt.duration_s},
          {"noise_std_m", opt.noise_std_m},
          {"seed", opt.seed},
          {"jobs", opt.jobs}});

  if (opt.format != "csv" && opt.format != "json")
    throw burstloc::InvalidConfig("--format must be csv or json");
  if (opt.detector.empty() && opt.scenarios_path.empty())
    throw burstloc::InvalidConfig("need --detector or --scenarios");

  std::vector<std::string> warnings;
  const auto model = burstloc::load_inp(opt.inp_path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  require_writable(opt.out_path);

  const auto scenarios = opt.scenarios_path.empty()
                             ? burstloc::default_scenarios(parse_detector(opt.detector))
                             : burstloc::load_scenarios(opt.scenarios_path);

  burstloc::GridOverrides overrides;
  overrides.burst_position = opt.burst_position;
  overrides.burst_start_s = opt.burst_start_s;
  overrides.duration_s = opt.duration_s;
  overrides.noise_std_m = opt.noise_std_m;
  overrides.rng_seed = opt.seed;
  overrides.jobs = opt.jobs;

  const auto report = burstloc::run_grid(model, scenarios, overrides);
  const std::string doc = opt.format == "csv" ? burstloc::emit_report_csv(report)
                                              : burstloc::emit_report_json(report);
  std::ofstream out(opt.out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw burstloc::IoError("cannot open '" + opt.out_path + "' for writing");
  out << doc;
  if (!out.flush()) throw burstloc::IoError("write to '" + opt.out_path + "' failed");

  for (const auto& s : report.scenarios)
    std::cout << s.name << ": " << s.correct << "/" << s.total << " correct ("
              << burstloc::accuracy(s.correct, s.total) << "%)\n";
  std::cout << "wrote " << report.cells.size() << " cells to " << opt.out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time pipe burst localization on water distribution networks"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic burst trace CSV");
  simulate->add_option("--inp", sim.inp_path, "network INP file")->required();
  simulate->add_option("--burst-pipe", sim.burst_pipe, "pipe carrying the burst")->required();
  simulate->add_option("--burst-position", sim.burst_position, "fraction along the pipe (0,1)");
  simulate->add_option("--burst-start", sim.burst_start_s, "burst start time, s");
  simulate->add_option("--magnitude", sim.magnitude_m, "orifice head drop, m");
  simulate->add_option("--wave-speed", sim.wave_speed_ms, "wavefront speed, m/s");
  simulate->add_option("--capture-interval", sim.capture_interval_s, "meter interval, s");
  simulate->add_option("--duration", sim.duration_s, "trace duration, s");
  simulate->add_option("--noise", sim.noise_std_m, "gaussian noise std, m");
  simulate->add_option("--attenuation", sim.attenuation_per_m, "drop decay per meter");
  simulate->add_option("--settle", sim.settle_time_s, "settling time constant, s");
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out", sim.out_path, "output CSV path");

  DetectOptions det;
  auto* detect = app.add_subcommand("detect", "Localize a burst from a trace");
  detect->add_option("--inp", det.inp_path, "network INP file")->required();
  detect->add_option("--replay", det.replay_path, "trace CSV to replay");
  detect->add_option("--detector", det.detector, "cusum or shewhart")->required();
  detect->add_option("--threshold", det.threshold, "detector threshold, m")->required();
  detect->add_option("--drift", det.drift, "cusum drift per step, m");
  detect->add_option("--interval", det.interval, "frames per localization batch");
  detect->add_option("--burst-pipe", det.burst_pipe, "simulate inline on this pipe");
  detect->add_option("--burst-position", det.burst_position, "fraction along the pipe (0,1)");
  detect->add_option("--burst-start", det.burst_start_s, "burst start time, s");
  detect->add_option("--magnitude", det.magnitude_m, "orifice head drop, m");
  detect->add_option("--wave-speed", det.wave_speed_ms, "wavefront speed, m/s");
  detect->add_option("--capture-interval", det.capture_interval_s, "meter interval, s");
  detect->add_option("--duration", det.duration_s, "trace duration, s");
  detect->add_option("--noise", det.noise_std_m, "gaussian noise std, m");
  detect->add_option("--seed", det.seed, "RNG seed");
  detect->add_option("--pacing", det.pacing, "fast or realtime");
  detect->add_option("--jobs", det.jobs, "parallel per-node detector calls");

  BenchOptions ben;
  auto* bench = app.add_subcommand("bench", "Run the burst grid and score accuracy");
  bench->add_option("--inp", ben.inp_path, "network INP file")->required();
  bench->add_option("--detector", ben.detector, "cusum or shewhart (standard grid rows)");
  bench->add_option("--scenarios", ben.scenarios_path, "scenario file overriding the grid rows");
  bench->add_option("--out", ben.out_path, "report path");
  bench->add_option("--format", ben.format, "csv or json");
  bench->add_option("--burst-position", ben.burst_position, "fraction along each pipe (0,1)");
  bench->add_option("--burst-start", ben.burst_start_s, "burst start time, s");
  bench->add_option("--duration", ben.duration_s, "base trace duration, s");
  bench->add_option("--noise", ben.noise_std_m, "gaussian noise std, m");
  bench->add_option("--seed", ben.seed, "RNG seed");
  bench->add_option("--jobs", ben.jobs, "parallel grid cells");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (detect->parsed()) return cmd_detect(det);
    if (bench->parsed()) return cmd_bench(ben);
  } catch (const burstloc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const burstloc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
