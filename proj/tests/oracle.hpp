#pragma once

// Test-only reference detectors, transcribed line by line from the original
// array-language routines (including their indexing conventions: argmax over
// an all-false mask is 0, negative fancy indices wrap from the end). Kept
// deliberately independent of the library implementation.

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

namespace oracle {

using ivec = std::vector<long>;

struct CusumRef {
  ivec starts;
  ivec ends;
  std::vector<double> amplitudes;
};

struct ShewhartRef {
  ivec starts;
  std::vector<double> amplitudes;
};

namespace np {

// np.argmax over a boolean mask: first true, or 0 when none.
inline long argmax(const std::vector<bool>& mask) {
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) return static_cast<long>(i);
  return 0;
}

// fancy indexing with negative wrap
inline ivec take(const ivec& v, const ivec& idx) {
  ivec out;
  for (long k : idx) out.push_back(v[static_cast<size_t>(k < 0 ? k + static_cast<long>(v.size()) : k)]);
  return out;
}

inline ivec reversed(const ivec& v) { return ivec(v.rbegin(), v.rend()); }

// np.unique(v, return_index=True): sorted unique values plus the index of the
// first occurrence of each.
inline void unique_return_index(const ivec& v, ivec& values, ivec& first_index) {
  std::map<long, long> first;
  for (size_t i = 0; i < v.size(); ++i) first.try_emplace(v[i], static_cast<long>(i));
  values.clear();
  first_index.clear();
  for (const auto& [val, idx] : first) {
    values.push_back(val);
    first_index.push_back(idx);
  }
}

}  // namespace np

// Forward (online) portion shared by both passes.
inline void cusum_online(const std::vector<double>& x, double thr, double dr, ivec& ta, ivec& tai) {
  const size_t n = x.size();
  std::vector<double> gp(n, 0.0), gn(n, 0.0), gp_real(n, 0.0), gn_real(n, 0.0);
  long tap = 0, tan = 0;
  for (size_t i = 1; i < n; ++i) {
    const double s = x[i] - x[i - 1];
    gp[i] = gp[i - 1] + s - dr;
    gp_real[i] = gp_real[i - 1] + s;
    gn[i] = gn[i - 1] - s - dr;
    gn_real[i] = gn_real[i - 1] - s;
    if (gp[i] < 0) {
      gp[i] = 0;
      gp_real[i] = 0;
      tap = static_cast<long>(i);
    }
    if (gn[i] < 0) {
      gn[i] = 0;
      gn_real[i] = 0;
      tan = static_cast<long>(i);
    }
    if (gp_real[i] > thr || gn_real[i] > thr) {
      ta.push_back(static_cast<long>(i));
      tai.push_back(gp_real[i] > thr ? tap : tan);
      gp[i] = 0;
      gn[i] = 0;
      gp_real[i] = 0;
      gn_real[i] = 0;
    }
  }
}

// Full two-pass procedure. `ending` guards the offline half; the reversed
// inner call runs with it off, exactly as the source routine recurses.
inline CusumRef detect_cusum(const std::vector<double>& x, double thr, double dr,
                             bool ending = true) {
  ivec ta, tai, taf;
  std::vector<double> amp;
  cusum_online(x, thr, dr, ta, tai);

  if (!tai.empty() && ending) {
    std::vector<double> xrev(x.rbegin(), x.rend());
    const CusumRef inner = detect_cusum(xrev, thr, dr, false);
    ivec tai2 = inner.starts;
    // taf = x.size - tai2[::-1] - 1
    for (long v : np::reversed(tai2)) taf.push_back(static_cast<long>(x.size()) - v - 1);

    ivec uniq, ind;
    np::unique_return_index(tai, uniq, ind);
    tai = uniq;
    ta = np::take(ta, ind);

    if (tai.size() != taf.size()) {
      if (tai.size() < taf.size()) {
        // taf = taf[[argmax(taf >= i) for i in ta]]
        ivec sel;
        for (long i : ta) {
          std::vector<bool> mask;
          for (long f : taf) mask.push_back(f >= i);
          sel.push_back(np::argmax(mask));
        }
        taf = np::take(taf, sel);
      } else {
        // ind = [argmax(i >= ta[::-1]) - 1 for i in taf]
        const ivec ta_rev = np::reversed(ta);
        ivec sel;
        for (long i : taf) {
          std::vector<bool> mask;
          for (long t : ta_rev) mask.push_back(i >= t);
          sel.push_back(np::argmax(mask) - 1);
        }
        ta = np::take(ta, sel);
        tai = np::take(tai, sel);
      }
    }

    // ind = taf[:-1] - tai[1:] > 0; drop the crossed start/end pairs
    std::vector<bool> ind2;
    for (size_t k = 0; k + 1 < tai.size(); ++k) ind2.push_back(taf[k] - tai[k + 1] > 0);
    bool any = false;
    for (bool b : ind2) any = any || b;
    if (any) {
      ivec ta3, tai3, taf3;
      for (size_t k = 0; k < tai.size(); ++k) {
        const bool drop_start = k > 0 && ind2[k - 1];
        if (!drop_start) {
          ta3.push_back(ta[k]);
          tai3.push_back(tai[k]);
        }
      }
      for (size_t k = 0; k < taf.size(); ++k) {
        const bool drop_end = k < ind2.size() && ind2[k];
        if (!drop_end) taf3.push_back(taf[k]);
      }
      ta = ta3;
      tai = tai3;
      taf = taf3;
    }

    for (size_t k = 0; k < tai.size(); ++k)
      amp.push_back(x[static_cast<size_t>(taf[k])] - x[static_cast<size_t>(tai[k])]);
    return {tai, taf, amp};
  }

  // online-only result: starts as appended, no ends
  return {tai, taf, amp};
}

// Direct per-index evaluation of the control-chart condition, with the mean
// and population deviation accumulated in index order.
inline ShewhartRef detect_shewhart(const std::vector<double>& x, double threshold) {
  const size_t n = x.size();
  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) mean += x[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (size_t i = 0; i < n; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);

  ShewhartRef out;
  for (size_t i = 1; i < n; ++i) {
    const double dev = std::abs(x[i] - mean);
    if (dev > threshold * sd && dev > threshold) {
      out.starts.push_back(static_cast<long>(i));
      out.amplitudes.push_back(dev);
    }
  }
  return out;
}

}  // namespace oracle
