#include "burstloc/localizer.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace burstloc {

namespace {

void validate(const LocalizerConfig& cfg) {
  if (cfg.localization_interval < 2)
    throw InvalidConfig("localization interval must be at least 2");
  if (cfg.metered_nodes.empty()) throw InvalidConfig("metered node set must not be empty");
  if (!(cfg.detector.threshold > 0)) throw InvalidConfig("detector threshold must be positive");
}

Eigen::ArrayXd node_series(const std::vector<PressureFrame>& window, const std::string& node) {
  Eigen::ArrayXd x(static_cast<Eigen::Index>(window.size()));
  for (size_t k = 0; k < window.size(); ++k) {
    auto it = window[k].readings.find(node);
    if (it == window[k].readings.end())
      throw UnknownNode("metered node '" + node + "' has no reading at frame " +
                        std::to_string(k));
    x[static_cast<Eigen::Index>(k)] = it->second;
  }
  return x;
}

Eigen::ArrayXd window_times(const std::vector<PressureFrame>& window) {
  Eigen::ArrayXd t(static_cast<Eigen::Index>(window.size()));
  for (size_t k = 0; k < window.size(); ++k)
    t[static_cast<Eigen::Index>(k)] = window[k].timestamp_s;
  return t;
}

std::vector<ChangeEvent> detect_node(const std::string& node, const Eigen::ArrayXd& t,
                                     const Eigen::ArrayXd& x, const DetectorConfig& det) {
  std::vector<ChangeEvent> events;
  if (det.kind == DetectorKind::cusum) {
    auto res = cusum_detect(t, x, CusumParams{det.threshold, det.drift});
    for (size_t k = 0; k < res.starts.size(); ++k)
      events.push_back({node, res.starts[k], res.ends[k],
                        res.amplitudes[static_cast<Eigen::Index>(k)]});
  } else {
    auto res = shewhart_detect(t, x, ShewhartParams{det.threshold});
    for (size_t k = 0; k < res.starts.size(); ++k)
      events.push_back({node, res.starts[k], res.starts[k],
                        res.amplitudes[static_cast<Eigen::Index>(k)]});
  }
  return events;
}

// A node's loudest event: |amplitude| first, then earlier start.
const ChangeEvent& representative(const std::vector<ChangeEvent>& events) {
  const ChangeEvent* best = &events.front();
  for (const auto& ev : events) {
    if (std::abs(ev.amplitude) > std::abs(best->amplitude) ||
        (std::abs(ev.amplitude) == std::abs(best->amplitude) &&
         ev.start_index < best->start_index))
      best = &ev;
  }
  return *best;
}

double window_mean(const std::vector<PressureFrame>& window, const std::string& node) {
  double sum = 0.0;
  size_t count = 0;
  for (const auto& f : window) {
    auto it = f.readings.find(node);
    if (it != f.readings.end()) {
      sum += it->second;
      ++count;
    }
  }
  return count == 0 ? std::numeric_limits<double>::infinity() : sum / static_cast<double>(count);
}

}  // namespace

std::string to_string(LocalizationRule rule) {
  switch (rule) {
    case LocalizationRule::two_node_neighbor: return "two-node-neighbor";
    case LocalizationRule::single_predecessor: return "single-predecessor";
    case LocalizationRule::max_amp_predecessor: return "max-amp-predecessor";
    case LocalizationRule::lowest_mean_predecessor: return "lowest-mean-predecessor";
    case LocalizationRule::source_fallback: return "source-fallback";
  }
  return "unknown";
}

std::string LocalizationResult::to_json() const {
  nlohmann::ordered_json j;
  j["start_node"] = start_node;
  j["end_node"] = end_node;
  j["rule"] = to_string(rule);
  j["decided_at_s"] = decided_at_s;
  j["window_frames"] = window_frames;
  return j.dump();
}

std::vector<PressureFrame> fetch_window(FrameFeed& feed, int interval,
                                        const std::vector<PressureFrame>& previous) {
  if (interval < 1) throw InvalidConfig("interval must be at least 1");
  std::vector<PressureFrame> window = previous;
  int fresh = 0;
  while (fresh < interval) {
    auto frame = feed.next();
    if (!frame)
      throw FeedClosed("feed ended after " + std::to_string(fresh) + " of " +
                       std::to_string(interval) + " frames");
    if (!frame->complete) continue;  // skipped, not counted
    window.push_back(std::move(*frame));
    ++fresh;
  }
  return window;
}

std::map<std::string, std::vector<ChangeEvent>> detect_all_nodes(
    const std::vector<PressureFrame>& window, const LocalizerConfig& cfg, int jobs) {
  validate(cfg);
  if (window.size() < 2) throw WindowTooShort("detection window needs at least 2 frames");

  const Eigen::ArrayXd t = window_times(window);
  const auto& nodes = cfg.metered_nodes;
  std::vector<std::vector<ChangeEvent>> per_node(nodes.size());

  auto work = [&](size_t j) { per_node[j] = detect_node(nodes[j], t, node_series(window, nodes[j]), cfg.detector); };

  if (jobs <= 1 || nodes.size() <= 1) {
    for (size_t j = 0; j < nodes.size(); ++j) work(j);
  } else {
    std::atomic<size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const size_t j = cursor.fetch_add(1);
        if (j >= nodes.size()) return;
        try {
          work(j);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::jthread> pool;
    const size_t n = std::min<size_t>(static_cast<size_t>(jobs), nodes.size());
    for (size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    pool.clear();  // join
    if (failure) std::rethrow_exception(failure);
  }

  std::map<std::string, std::vector<ChangeEvent>> out;
  for (size_t j = 0; j < nodes.size(); ++j)
    if (!per_node[j].empty()) out[nodes[j]] = std::move(per_node[j]);
  return out;
}

LocalizationResult localize(const std::map<std::string, std::vector<ChangeEvent>>& events,
                            const DirectedNetworkGraph& graph,
                            const std::vector<PressureFrame>& window, double burst_start_s) {
  auto [anchor, anchor_event] = max_amplitude_event(events);

  LocalizationResult result;
  result.window_frames = static_cast<int>(window.size());
  result.decided_at_s = (window.empty() ? 0.0 : window.back().timestamp_s) - burst_start_s;

  const auto& downstream = successors(graph, anchor);
  const auto& upstream = predecessors(graph, anchor);

  // (a) two alarmed nodes, the other just downstream of the anchor
  if (events.size() == 2) {
    for (const auto& entry : events) {
      if (entry.first != anchor && downstream.count(entry.first)) {
        result.start_node = anchor;
        result.end_node = entry.first;
        result.rule = LocalizationRule::two_node_neighbor;
        return result;
      }
    }
  }

  if (!upstream.empty()) {
    // (b) unique upstream feed
    if (upstream.size() == 1) {
      result.start_node = *upstream.begin();
      result.end_node = anchor;
      result.rule = LocalizationRule::single_predecessor;
      return result;
    }
    // (c) loudest upstream node that alarmed
    const std::string* pick = nullptr;
    const ChangeEvent* pick_event = nullptr;
    for (const auto& pred : upstream) {
      auto it = events.find(pred);
      if (it == events.end()) continue;
      const ChangeEvent& rep = representative(it->second);
      if (!pick || std::abs(rep.amplitude) > std::abs(pick_event->amplitude) ||
          (std::abs(rep.amplitude) == std::abs(pick_event->amplitude) &&
           rep.start_index < pick_event->start_index)) {
        pick = &pred;
        pick_event = &rep;
      }
    }
    if (pick) {
      result.start_node = *pick;
      result.end_node = anchor;
      result.rule = LocalizationRule::max_amp_predecessor;
      return result;
    }
    // (d) upstream node with the lowest mean pressure over the window
    const std::string* lowest = nullptr;
    double lowest_mean = std::numeric_limits<double>::infinity();
    for (const auto& pred : upstream) {
      const double mean = window_mean(window, pred);
      if (!lowest || mean < lowest_mean) {
        lowest = &pred;
        lowest_mean = mean;
      }
    }
    result.start_node = *lowest;
    result.end_node = anchor;
    result.rule = LocalizationRule::lowest_mean_predecessor;
    return result;
  }

  // Anchor is a source: fall back to its loudest downstream neighbor, by
  // |amplitude| when any alarmed, else by lowest window mean.
  if (!downstream.empty()) {
    const std::string* pick = nullptr;
    const ChangeEvent* pick_event = nullptr;
    for (const auto& succ : downstream) {
      auto it = events.find(succ);
      if (it == events.end()) continue;
      const ChangeEvent& rep = representative(it->second);
      if (!pick || std::abs(rep.amplitude) > std::abs(pick_event->amplitude) ||
          (std::abs(rep.amplitude) == std::abs(pick_event->amplitude) &&
           rep.start_index < pick_event->start_index)) {
        pick = &succ;
        pick_event = &rep;
      }
    }
    if (!pick) {
      double lowest_mean = std::numeric_limits<double>::infinity();
      for (const auto& succ : downstream) {
        const double mean = window_mean(window, succ);
        if (!pick || mean < lowest_mean) {
          pick = &succ;
          lowest_mean = mean;
        }
      }
    }
    result.start_node = anchor;
    result.end_node = *pick;
    result.rule = LocalizationRule::source_fallback;
    return result;
  }

  throw NoPredecessor("node '" + anchor + "' has neither upstream nor downstream neighbors");
}

std::optional<LocalizationResult> run_pipeline(FrameFeed& feed, const DirectedNetworkGraph& graph,
                                               const LocalizerConfig& cfg, double burst_start_s,
                                               int jobs) {
  validate(cfg);
  for (const auto& n : cfg.metered_nodes)
    if (!graph.has_node(n)) throw UnknownNode("metered node '" + n + "' not in graph");

  std::vector<PressureFrame> previous;
  for (;;) {
    std::vector<PressureFrame> window;
    try {
      window = fetch_window(feed, cfg.localization_interval, previous);
    } catch (const FeedClosed&) {
      return std::nullopt;
    }
    auto events = detect_all_nodes(window, cfg, jobs);
    if (!events.empty()) return localize(events, graph, window, burst_start_s);
    previous.assign(window.end() - cfg.localization_interval, window.end());
  }
}

}  // namespace burstloc
