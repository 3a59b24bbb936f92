#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "burstloc/cpd.hpp"
#include "burstloc/inp_model.hpp"
#include "burstloc/stream.hpp"

namespace burstloc {

enum class DetectorKind { cusum, shewhart };

struct DetectorConfig {
  DetectorKind kind = DetectorKind::cusum;
  double threshold = 0.3;
  double drift = 0.0;  // cusum only
};

struct LocalizerConfig {
  DetectorConfig detector;
  int localization_interval = 5;  // new complete frames per batch, >= 2
  std::vector<std::string> metered_nodes;
};

enum class LocalizationRule {
  two_node_neighbor,
  single_predecessor,
  max_amp_predecessor,
  lowest_mean_predecessor,
  source_fallback,
};

std::string to_string(LocalizationRule rule);

struct LocalizationResult {
  std::string start_node;
  std::string end_node;
  LocalizationRule rule = LocalizationRule::two_node_neighbor;
  double decided_at_s = 0.0;  // last window timestamp minus the burst start
  int window_frames = 0;

  /// `{"start_node","end_node","rule","decided_at_s","window_frames"}`.
  std::string to_json() const;
};

/// Blocks until `interval` new complete frames arrive (incomplete frames are
/// skipped without counting) and returns `previous` followed by the new
/// frames. Throws FeedClosed when the feed drains first.
std::vector<PressureFrame> fetch_window(FrameFeed& feed, int interval,
                                        const std::vector<PressureFrame>& previous);

/// Runs the configured detector on every metered node's series over the
/// window. Nodes with no events are omitted. `jobs` > 1 spreads nodes across
/// threads; the merged result is independent of scheduling.
std::map<std::string, std::vector<ChangeEvent>> detect_all_nodes(
    const std::vector<PressureFrame>& window, const LocalizerConfig& cfg, int jobs = 1);

/// Names the burst pipe from the per-node events. The loudest node anchors the
/// decision chain:
///   (a) exactly two nodes alarmed and the other sits just downstream;
///   (b) the anchor has a unique upstream node;
///   (c) the loudest upstream node that also alarmed;
///   (d) the upstream node with the lowest mean pressure over the window.
/// An anchor with no upstream nodes falls back to its loudest downstream
/// neighbor, tagged source_fallback.
LocalizationResult localize(const std::map<std::string, std::vector<ChangeEvent>>& events,
                            const DirectedNetworkGraph& graph,
                            const std::vector<PressureFrame>& window, double burst_start_s = 0.0);

/// Batch loop: fetch window, detect, localize on the first batch with events.
/// Each batch's new frames become the next batch's `previous` half. Empty when
/// the feed ends without any detection.
std::optional<LocalizationResult> run_pipeline(FrameFeed& feed, const DirectedNetworkGraph& graph,
                                               const LocalizerConfig& cfg,
                                               double burst_start_s = 0.0, int jobs = 1);

}  // namespace burstloc
