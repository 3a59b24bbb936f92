#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <chrono>

#include "burstloc/stream.hpp"

using namespace burstloc;

namespace {

std::vector<PressureFrame> make_frames(int count, double dt) {
  std::vector<PressureFrame> frames;
  for (int k = 0; k < count; ++k) {
    PressureFrame f;
    f.timestamp_s = k * dt;
    f.readings["A"] = 42.0 + k;
    f.complete = true;
    frames.push_back(f);
  }
  return frames;
}

}  // namespace

TEST_CASE("stream: frames arrive in order, fast path") {
  auto source = stream(make_frames(5, 0.2), Pacing::as_fast_as_possible);
  int seen = 0;
  while (auto f = source.feed().next()) {
    CHECK(f->timestamp_s == doctest::Approx(seen * 0.2));
    ++seen;
  }
  CHECK(seen == 5);
  // drained feed keeps returning empty
  CHECK(!source.feed().next().has_value());
}

TEST_CASE("stream: real-time pacing takes at least the span of the trace") {
  using clock = std::chrono::steady_clock;
  const auto begin = clock::now();
  auto source = stream(make_frames(5, 0.2), Pacing::real_time);
  int seen = 0;
  while (source.feed().next()) ++seen;
  const std::chrono::duration<double> elapsed = clock::now() - begin;
  CHECK(seen == 5);
  CHECK(elapsed.count() >= 0.8);  // four inter-frame gaps of 0.2 s
}

TEST_CASE("stream: empty sequence closes immediately") {
  auto source = stream({}, Pacing::as_fast_as_possible);
  CHECK(!source.feed().next().has_value());

  auto paced = stream({}, Pacing::real_time);
  CHECK(!paced.feed().next().has_value());
}
