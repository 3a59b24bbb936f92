#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "burstloc/transient.hpp"

namespace burstloc {

/// Single-producer ordered channel of pressure frames. Frames are immutable
/// once pushed; exactly one consumer drains them in order.
class FrameFeed {
 public:
  void push(PressureFrame frame);
  void close();

  /// Blocks for the next frame; empty once the feed is closed and drained.
  std::optional<PressureFrame> next();

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<PressureFrame> queue_;
  bool closed_ = false;
};

enum class Pacing {
  real_time,            // release frame k no earlier than its timestamp offset
  as_fast_as_possible,  // release everything immediately
};

/// Movable handle over a feed plus the producer delivering into it. Real-time
/// pacing runs the producer on its own thread, paced by the frames' timestamp
/// offsets from the first frame; it is joined on destruction.
class FrameSource {
 public:
  FrameSource(std::shared_ptr<FrameFeed> feed, std::jthread producer)
      : feed_(std::move(feed)), producer_(std::move(producer)) {}

  FrameFeed& feed() { return *feed_; }

 private:
  std::shared_ptr<FrameFeed> feed_;
  std::jthread producer_;
};

FrameSource stream(std::vector<PressureFrame> frames, Pacing pacing);

}  // namespace burstloc
