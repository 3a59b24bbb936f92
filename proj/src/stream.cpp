#include "burstloc/stream.hpp"

#include <chrono>

namespace burstloc {

void FrameFeed::push(PressureFrame frame) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(frame));
  }
  ready_.notify_one();
}

void FrameFeed::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

std::optional<PressureFrame> FrameFeed::next() {
  std::unique_lock lock(mutex_);
  ready_.wait(lock, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  PressureFrame frame = std::move(queue_.front());
  queue_.pop_front();
  return frame;
}

FrameSource stream(std::vector<PressureFrame> frames, Pacing pacing) {
  auto feed = std::make_shared<FrameFeed>();
  if (pacing == Pacing::as_fast_as_possible) {
    for (auto& f : frames) feed->push(std::move(f));
    feed->close();
    return FrameSource(std::move(feed), std::jthread{});
  }

  std::jthread producer([feed, frames = std::move(frames)]() mutable {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    const double t0 = frames.empty() ? 0.0 : frames.front().timestamp_s;
    for (auto& f : frames) {
      const auto offset = std::chrono::duration<double>(f.timestamp_s - t0);
      std::this_thread::sleep_until(start +
                                    std::chrono::duration_cast<clock::duration>(offset));
      feed->push(std::move(f));
    }
    feed->close();
  });
  return FrameSource(std::move(feed), std::move(producer));
}

}  // namespace burstloc
