#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "burstloc/errors.hpp"

namespace burstloc {

struct CusumParams {
  double threshold = 1.0;  // alarm level on the drift-free sums, meters
  double drift = 0.0;      // bias subtracted from each increment, meters/step
};

struct ShewhartParams {
  // Doubles as the control-limit multiplier on the window deviation and as an
  // absolute floor in meters; a point must clear both.
  double threshold = 1.0;
};

/// One detected change on one node's series.
struct ChangeEvent {
  std::string node;
  Eigen::Index start_index = 0;
  Eigen::Index end_index = 0;  // equals start_index for Shewhart detections
  double amplitude = 0.0;      // signed x[end]-x[start] for CUSUM, |x[i]-mean| for Shewhart

  friend bool operator==(const ChangeEvent&, const ChangeEvent&) = default;
};

template <class Scalar>
struct CusumResult {
  std::vector<Eigen::Index> starts;
  std::vector<Eigen::Index> ends;
  Eigen::ArrayX<Scalar> amplitudes;
};

template <class Scalar>
struct ShewhartResult {
  std::vector<Eigen::Index> starts;
  Eigen::ArrayX<Scalar> amplitudes;
};

/// Per-step accumulator values recorded after clamping/resets, for inspection.
template <class Scalar>
struct CusumDiagnostics {
  Eigen::ArrayX<Scalar> gp, gn, gp_real, gn_real;
};

namespace detail {

template <class Scalar>
struct CusumScan {
  std::vector<Eigen::Index> alarms;  // index at which each alarm fired
  std::vector<Eigen::Index> starts;  // tentative start captured with each alarm
};

// Forward alarm scan. The drift-corrected sums gate the clamp-to-zero (which
// also captures the tentative start), while the drift-free shadows gate the
// alarm test; an alarm resets all four sums.
template <class Scalar>
CusumScan<Scalar> cusum_scan(const Eigen::ArrayX<Scalar>& x, Scalar thr, Scalar dr,
                             CusumDiagnostics<Scalar>* diag) {
  CusumScan<Scalar> scan;
  if (diag) {
    diag->gp = Eigen::ArrayX<Scalar>::Zero(x.size());
    diag->gn = Eigen::ArrayX<Scalar>::Zero(x.size());
    diag->gp_real = Eigen::ArrayX<Scalar>::Zero(x.size());
    diag->gn_real = Eigen::ArrayX<Scalar>::Zero(x.size());
  }
  Scalar gp = 0, gn = 0, gp_real = 0, gn_real = 0;
  Eigen::Index tentative_pos = 0, tentative_neg = 0;
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    const Scalar step = x[i] - x[i - 1];
    gp = gp + step - dr;
    gp_real = gp_real + step;
    gn = gn - step - dr;
    gn_real = gn_real - step;
    if (gp < Scalar(0)) {
      gp = 0;
      gp_real = 0;
      tentative_pos = i;
    }
    if (gn < Scalar(0)) {
      gn = 0;
      gn_real = 0;
      tentative_neg = i;
    }
    if (gp_real > thr || gn_real > thr) {
      scan.alarms.push_back(i);
      scan.starts.push_back(gp_real > thr ? tentative_pos : tentative_neg);
      gp = gn = gp_real = gn_real = 0;
    }
    if (diag) {
      diag->gp[i] = gp;
      diag->gn[i] = gn;
      diag->gp_real[i] = gp_real;
      diag->gn_real[i] = gn_real;
    }
  }
  return scan;
}

// Fancy indexing with python-style negative wrap (-1 is the last element).
inline std::vector<Eigen::Index> take(const std::vector<Eigen::Index>& v,
                                      const std::vector<std::ptrdiff_t>& idx) {
  std::vector<Eigen::Index> out;
  out.reserve(idx.size());
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  for (std::ptrdiff_t k : idx) out.push_back(v[static_cast<size_t>(k < 0 ? k + n : k)]);
  return out;
}

}  // namespace detail

/// Two-pass CUSUM over one pressure series. The forward scan yields alarm and
/// start indices; end indices come from the same scan on the reversed series,
/// mirrored back. Starts are deduplicated keeping the first alarm per start;
/// when the two passes disagree on count, each alarm keeps the first end at
/// or past it (or each end keeps the latest alarm not past it, falling back
/// to the last when an end precedes them all); adjacent intervals whose end
/// crosses the next start are merged. Amplitudes are x[end]-x[start].
template <class DerivedT, class DerivedX>
CusumResult<typename DerivedX::Scalar> cusum_detect(
    const Eigen::ArrayBase<DerivedT>& time, const Eigen::ArrayBase<DerivedX>& x_in,
    const CusumParams& params, CusumDiagnostics<typename DerivedX::Scalar>* diag = nullptr) {
  using Scalar = typename DerivedX::Scalar;
  using Index = Eigen::Index;

  if (time.size() != x_in.size())
    throw LengthMismatch("time and pressure series lengths differ");
  if (x_in.size() < 2) throw WindowTooShort("detector needs at least 2 samples");
  if (!(params.threshold > 0)) throw InvalidConfig("cusum threshold must be positive");
  if (!(params.drift >= 0)) throw InvalidConfig("cusum drift must be non-negative");

  const Eigen::ArrayX<Scalar> x = x_in;
  const auto thr = static_cast<Scalar>(params.threshold);
  const auto dr = static_cast<Scalar>(params.drift);

  CusumResult<Scalar> out;
  auto fwd = detail::cusum_scan<Scalar>(x, thr, dr, diag);
  if (fwd.starts.empty()) return out;

  const Eigen::ArrayX<Scalar> xr = x.reverse();
  auto bwd = detail::cusum_scan<Scalar>(xr, thr, dr, nullptr);

  std::vector<Index> ends;
  ends.reserve(bwd.starts.size());
  for (auto it = bwd.starts.rbegin(); it != bwd.starts.rend(); ++it)
    ends.push_back(x.size() - *it - 1);

  // Deduplicate starts by value (ascending), keeping the first alarm each.
  std::map<Index, size_t> first_pos;
  for (size_t k = 0; k < fwd.starts.size(); ++k) first_pos.try_emplace(fwd.starts[k], k);
  std::vector<Index> starts, alarms;
  starts.reserve(first_pos.size());
  alarms.reserve(first_pos.size());
  for (const auto& [value, k] : first_pos) {
    starts.push_back(value);
    alarms.push_back(fwd.alarms[k]);
  }

  if (starts.size() != ends.size()) {
    if (starts.size() < ends.size()) {
      std::vector<Index> picked;
      picked.reserve(alarms.size());
      for (Index a : alarms) {
        size_t pick = 0;  // first end at or past the alarm; 0 when none qualifies
        for (size_t q = 0; q < ends.size(); ++q) {
          if (ends[q] >= a) {
            pick = q;
            break;
          }
        }
        picked.push_back(ends[pick]);
      }
      ends = std::move(picked);
    } else {
      std::vector<Index> alarms_rev(alarms.rbegin(), alarms.rend());
      std::vector<std::ptrdiff_t> sel;
      sel.reserve(ends.size());
      for (Index e : ends) {
        std::ptrdiff_t pick = 0;  // first reversed alarm at or before the end; 0 when none
        for (size_t q = 0; q < alarms_rev.size(); ++q) {
          if (e >= alarms_rev[q]) {
            pick = static_cast<std::ptrdiff_t>(q);
            break;
          }
        }
        sel.push_back(pick - 1);  // may be -1, which wraps to the last entry
      }
      alarms = detail::take(alarms, sel);
      starts = detail::take(starts, sel);
    }
  }

  // Merge adjacent intervals when one ends past the start of the next.
  const size_t m = starts.size();
  std::vector<char> crosses(m > 0 ? m - 1 : 0, 0);
  bool any = false;
  for (size_t k = 0; k + 1 < m; ++k) {
    crosses[k] = ends[k] - starts[k + 1] > 0;
    any = any || crosses[k];
  }
  if (any) {
    std::vector<Index> s2, e2;
    for (size_t k = 0; k < m; ++k)
      if (k == 0 || !crosses[k - 1]) s2.push_back(starts[k]);
    for (size_t k = 0; k < m; ++k)
      if (k + 1 == m || !crosses[k]) e2.push_back(ends[k]);
    starts = std::move(s2);
    ends = std::move(e2);
  }

  out.starts = std::move(starts);
  out.ends = std::move(ends);
  out.amplitudes.resize(static_cast<Index>(out.starts.size()));
  for (size_t k = 0; k < out.starts.size(); ++k)
    out.amplitudes[static_cast<Index>(k)] = x[out.ends[k]] - x[out.starts[k]];
  return out;
}

/// Control-chart detector: a point is flagged when its deviation from the
/// window mean clears both threshold*sigma and the absolute threshold.
/// Mean and (population) deviation are accumulated in index order so results
/// are reproducible sample for sample.
template <class DerivedT, class DerivedX>
ShewhartResult<typename DerivedX::Scalar> shewhart_detect(const Eigen::ArrayBase<DerivedT>& time,
                                                          const Eigen::ArrayBase<DerivedX>& x_in,
                                                          const ShewhartParams& params) {
  using Scalar = typename DerivedX::Scalar;
  using Index = Eigen::Index;

  if (time.size() != x_in.size())
    throw LengthMismatch("time and pressure series lengths differ");
  if (x_in.size() < 2) throw WindowTooShort("detector needs at least 2 samples");
  if (!(params.threshold > 0)) throw InvalidConfig("shewhart threshold must be positive");

  const Eigen::ArrayX<Scalar> x = x_in;
  const auto thr = static_cast<Scalar>(params.threshold);
  const Index n = x.size();

  Scalar mean = 0;
  for (Index i = 0; i < n; ++i) mean += x[i];
  mean /= static_cast<Scalar>(n);
  Scalar var = 0;
  for (Index i = 0; i < n; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= static_cast<Scalar>(n);
  const Scalar sigma = std::sqrt(var);

  ShewhartResult<Scalar> out;
  std::vector<Scalar> amps;
  for (Index i = 1; i < n; ++i) {
    const Scalar dev = std::abs(x[i] - mean);
    if (dev > thr * sigma && dev > thr) {
      out.starts.push_back(i);
      amps.push_back(dev);
    }
  }
  out.amplitudes = Eigen::Map<const Eigen::ArrayX<Scalar>>(amps.data(),
                                                           static_cast<Index>(amps.size()));
  return out;
}

/// The node/event pair with the largest |amplitude|; ties go to the earlier
/// start index, then the smaller node id.
inline std::pair<std::string, ChangeEvent> max_amplitude_event(
    const std::map<std::string, std::vector<ChangeEvent>>& events) {
  const ChangeEvent* best = nullptr;
  const std::string* best_node = nullptr;
  for (const auto& [node, list] : events) {
    for (const ChangeEvent& ev : list) {
      if (!best) {
        best = &ev;
        best_node = &node;
        continue;
      }
      const double a = std::abs(ev.amplitude), b = std::abs(best->amplitude);
      if (a > b || (a == b && (ev.start_index < best->start_index ||
                               (ev.start_index == best->start_index && node < *best_node)))) {
        best = &ev;
        best_node = &node;
      }
    }
  }
  if (!best) throw NoEvents("no change events to rank");
  return {*best_node, *best};
}

}  // namespace burstloc
