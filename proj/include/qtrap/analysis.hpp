#pragma once

// Peak extraction from S(P) time series and collapse/revival classification
// against the inversion envelope.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qtrap {

enum class PeakKind { initial, revival, collapse, unclassified };

inline const char* to_string(PeakKind k) {
  switch (k) {
    case PeakKind::initial: return "initial";
    case PeakKind::revival: return "revival";
    case PeakKind::collapse: return "collapse";
    default: return "unclassified";
  }
}

struct PeakRecord {
  double t_plot = 0.0;
  double s_value = 0.0;
  PeakKind kind = PeakKind::unclassified;
  double envelope_amplitude = 0.0;
};

struct PeakParams {
  // Defaults tuned so the reference parameter sets yield one record per
  // collapse/revival event; all CLI-overridable.
  double smooth_window = 5.0;   // t_plot units, centered moving average
  double prominence = 0.008;
  double refine_window = 6.0;   // raw-maximum search radius around a smoothed peak
  double envelope_window = 10.0;
  double revival_threshold = 0.05;
};

namespace detail {

inline std::vector<double> moving_average(const std::vector<double>& y, int half) {
  const int n = static_cast<int>(y.size());
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += y[j];
    out[i] = s / (hi - lo + 1);
  }
  return out;
}

// scipy-style prominence: height above the higher of the two base valleys,
// each base being the minimum between the peak and the nearest higher point.
inline double prominence_at(const std::vector<double>& y, int i) {
  const int n = static_cast<int>(y.size());
  double left_min = y[i], right_min = y[i];
  for (int j = i - 1; j >= 0; --j) {
    if (y[j] > y[i]) break;
    left_min = std::min(left_min, y[j]);
  }
  for (int j = i + 1; j < n; ++j) {
    if (y[j] > y[i]) break;
    right_min = std::min(right_min, y[j]);
  }
  return y[i] - std::max(left_min, right_min);
}

}  // namespace detail

// Smooths, finds prominent local maxima, then reports the raw local maximum
// near each (S(P) oscillates at twice the Rabi rate inside a revival, so the
// table-style value lives on the raw series, not the smoothed one).  The
// t = 0 sample is always included, labeled `initial`.
inline std::vector<PeakRecord> detect_peaks(const std::vector<double>& t,
                                            const std::vector<double>& s_p,
                                            const PeakParams& pp = {}) {
  if (t.empty() || t.size() != s_p.size())
    throw std::invalid_argument("detect_peaks: empty or mismatched series");
  const int n = static_cast<int>(t.size());
  const double dt = n > 1 ? t[1] - t[0] : 1.0;
  const int half = std::max(1, static_cast<int>(std::lround(pp.smooth_window / dt)));
  const int refine = std::max(1, static_cast<int>(std::lround(pp.refine_window / dt)));
  auto sm = detail::moving_average(s_p, half);

  std::vector<PeakRecord> out;
  out.push_back({t[0], s_p[0], PeakKind::initial, 0.0});

  int last_raw = 0;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(sm[i] > sm[i - 1] && sm[i] >= sm[i + 1])) continue;
    if (detail::prominence_at(sm, i) < pp.prominence) continue;
    const int lo = std::max(0, i - refine), hi = std::min(n - 1, i + refine);
    int j = lo;
    for (int k = lo; k <= hi; ++k)
      if (s_p[k] > s_p[j]) j = k;
    if (j == last_raw || j == 0) continue;  // merged with the previous record
    last_raw = j;
    out.push_back({t[j], s_p[j], PeakKind::unclassified, 0.0});
  }
  return out;
}

// Envelope amplitude = RMS of (I - mean I) over [t-w, t+w]; revival when it
// clears the threshold, collapse otherwise; borderline verdicts (within 20%
// of the threshold) stay `unclassified`.
inline std::vector<PeakRecord> classify_peaks(std::vector<PeakRecord> peaks,
                                              const std::vector<double>& t,
                                              const std::vector<double>& inv,
                                              const PeakParams& pp = {}) {
  if (t.size() != inv.size())
    throw std::invalid_argument("classify_peaks: mismatched series");
  for (auto& pk : peaks) {
    double sum = 0.0, sum2 = 0.0;
    int cnt = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (std::abs(t[i] - pk.t_plot) > pp.envelope_window) continue;
      sum += inv[i];
      sum2 += inv[i] * inv[i];
      ++cnt;
    }
    if (cnt > 0) {
      const double mean = sum / cnt;
      pk.envelope_amplitude = std::sqrt(std::max(0.0, sum2 / cnt - mean * mean));
    }
    if (pk.kind == PeakKind::initial) continue;
    const double env = pk.envelope_amplitude;
    if (std::abs(env - pp.revival_threshold) < 0.2 * pp.revival_threshold)
      pk.kind = PeakKind::unclassified;
    else
      pk.kind = env >= pp.revival_threshold ? PeakKind::revival : PeakKind::collapse;
  }
  return peaks;
}

namespace detail {
inline std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}
}  // namespace detail

inline std::string peak_table_csv(const std::vector<PeakRecord>& records) {
  std::ostringstream os;
  os << "t_plot,s_p,kind,envelope_amplitude\n";
  for (const auto& r : records)
    os << detail::fmt6(r.t_plot) << ',' << detail::fmt6(r.s_value) << ','
       << to_string(r.kind) << ',' << detail::fmt6(r.envelope_amplitude) << '\n';
  return os.str();
}

// Aligned text form plus the verdict on whether successive revival maxima
// decrease monotonically.
inline std::string peak_table_text(const std::vector<PeakRecord>& records) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof line, "%10s %10s %-12s %10s\n", "t", "S(P)",
                "kind", "envelope");
  os << line;
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%10.6g %10.6g %-12s %10.6g\n", r.t_plot,
                  r.s_value, to_string(r.kind), r.envelope_amplitude);
    os << line;
  }
  bool monotone = true;
  double prev = -1.0;
  int n_rev = 0;
  for (const auto& r : records) {
    if (r.kind != PeakKind::revival) continue;
    if (n_rev > 0 && r.s_value >= prev) monotone = false;
    prev = r.s_value;
    ++n_rev;
  }
  if (n_rev >= 2)
    os << "revival maxima " << (monotone ? "strictly decreasing" : "not monotone")
       << " (" << n_rev << " revivals)\n";
  return os.str();
}

inline bool revival_maxima_decreasing(const std::vector<PeakRecord>& records) {
  double prev = -1.0;
  int n_rev = 0;
  for (const auto& r : records) {
    if (r.kind != PeakKind::revival) continue;
    if (n_rev > 0 && r.s_value >= prev) return false;
    prev = r.s_value;
    ++n_rev;
  }
  return n_rev >= 2;
}

}  // namespace qtrap
