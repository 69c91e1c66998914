#include "qpreduce/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qpreduce/algebra.hpp"

namespace qpr {

namespace {

// iterative radix-2 FFT, in place
void fft(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    Complex wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        Complex u = a[i + k];
        Complex v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

std::size_t next_pow2(std::size_t v) {
  std::size_t n = 1;
  while (n < v) n <<= 1;
  return n;
}

}  // namespace

Psd welch_psd(const std::vector<double>& signal, double sample_rate_hz,
              int segment_len, double overlap_frac) {
  if (segment_len <= 1 || static_cast<std::size_t>(segment_len) > signal.size())
    throw SegmentError("welch: segment length exceeds the signal length");
  if (overlap_frac < 0.0 || overlap_frac >= 1.0)
    throw SegmentError("welch: overlap fraction must lie in [0, 1)");
  if (!(sample_rate_hz > 0.0)) throw SegmentError("welch: sample rate must be positive");

  const int L = segment_len;
  const int hop = std::max(1, static_cast<int>(std::lround(L * (1.0 - overlap_frac))));
  const std::size_t nfft = next_pow2(static_cast<std::size_t>(L));
  const std::size_t nbins = nfft / 2 + 1;

  std::vector<double> window(L);
  double wpow = 0.0;
  for (int i = 0; i < L; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (L - 1)));
    wpow += window[i] * window[i];
  }

  Psd out;
  out.freq_hz.resize(nbins);
  out.density.assign(nbins, 0.0);
  for (std::size_t k = 0; k < nbins; ++k)
    out.freq_hz[k] = sample_rate_hz * static_cast<double>(k) / static_cast<double>(nfft);

  int segments = 0;
  std::vector<Complex> buf(nfft);
  for (std::size_t start = 0; start + L <= signal.size();
       start += static_cast<std::size_t>(hop)) {
    std::fill(buf.begin(), buf.end(), Complex(0.0, 0.0));
    for (int i = 0; i < L; ++i)
      buf[i] = Complex(signal[start + i] * window[i], 0.0);
    fft(buf);
    for (std::size_t k = 0; k < nbins; ++k) {
      double mag2 = std::norm(buf[k]);
      double scale = (k == 0 || k == nfft / 2) ? 1.0 : 2.0;
      out.density[k] += scale * mag2 / (sample_rate_hz * wpow);
    }
    ++segments;
  }
  if (segments == 0) throw SegmentError("welch: no full segment fits the signal");
  for (double& d : out.density) d /= segments;
  return out;
}

std::vector<PsdPeak> psd_peaks(const Psd& psd, double rel_db) {
  std::vector<PsdPeak> peaks;
  if (psd.density.size() < 3) return peaks;
  double maxp = *std::max_element(psd.density.begin(), psd.density.end());
  if (maxp <= 0.0) return peaks;
  double floor = maxp * std::pow(10.0, rel_db / 10.0);
  for (std::size_t k = 1; k + 1 < psd.density.size(); ++k) {
    double p = psd.density[k];
    if (p < floor) continue;
    if (p > psd.density[k - 1] && p >= psd.density[k + 1])
      peaks.push_back({psd.freq_hz[k], p});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const PsdPeak& a, const PsdPeak& b) { return a.power > b.power; });
  return peaks;
}

namespace {

Trajectory resample_onto(const Trajectory& ref, const Trajectory& src) {
  double lo = std::max(ref.times.front(), src.times.front());
  double hi = std::min(ref.times.back(), src.times.back());
  if (!(hi > lo)) throw GridError("compare: trajectories do not overlap in time");
  Trajectory out;
  out.meta = src.meta;
  out.times = ref.times;
  out.states.resize(static_cast<int>(ref.times.size()), src.state_dim());
  std::size_t j = 0;
  for (std::size_t i = 0; i < ref.times.size(); ++i) {
    double t = std::clamp(ref.times[i], lo, hi);
    while (j + 2 < src.times.size() && src.times[j + 1] < t) ++j;
    double t0 = src.times[j], t1 = src.times[j + 1];
    double a = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
    a = std::clamp(a, 0.0, 1.0);
    out.states.row(static_cast<int>(i)) =
        (1.0 - a) * src.states.row(static_cast<int>(j)) +
        a * src.states.row(static_cast<int>(j) + 1);
  }
  return out;
}

}  // namespace

ComparisonReport compare(const Trajectory& a, const Trajectory& b,
                         const PsdConfig& cfg) {
  if (a.state_dim() != b.state_dim())
    throw GridError("compare: trajectories have different state dimensions");
  Trajectory bb = b;
  bool same_grid = a.size() == b.size();
  if (same_grid)
    for (std::size_t i = 0; i < a.size() && same_grid; ++i)
      same_grid = std::abs(a.times[i] - b.times[i]) <= 1e-12;
  if (!same_grid) bb = resample_onto(a, b);

  ComparisonReport rep;
  rep.rms_error.resize(a.state_dim());
  rep.max_error.resize(a.state_dim());
  for (int j = 0; j < a.state_dim(); ++j) {
    Eigen::VectorXd diff = a.states.col(j) - bb.states.col(j);
    rep.rms_error(j) = rms(diff);
    rep.max_error(j) = diff.cwiseAbs().maxCoeff();
  }

  double dt = a.times.size() > 1 ? a.times[1] - a.times[0] : 1.0;
  double fs = 1.0 / dt;
  int seg = std::min<std::size_t>(cfg.segment_len, a.size());
  rep.psd_match = true;
  for (int j = 0; j < a.state_dim(); ++j) {
    Psd pa = welch_psd(a.column(j), fs, seg, cfg.overlap_frac);
    Psd pb = welch_psd(bb.column(j), fs, seg, cfg.overlap_frac);
    rep.bin_width_hz = pa.freq_hz.size() > 1 ? pa.freq_hz[1] - pa.freq_hz[0] : 0.0;
    auto peaks_a = psd_peaks(pa, cfg.rel_peak_db);
    auto peaks_b = psd_peaks(pb, cfg.rel_peak_db);
    for (const auto& pk : peaks_a) {
      bool found = false;
      for (const auto& qk : peaks_b)
        if (std::abs(qk.freq_hz - pk.freq_hz) <= rep.bin_width_hz * (1.0 + 1e-9))
          found = true;
      if (!found) rep.psd_match = false;
    }
    rep.peaks_a.push_back(std::move(peaks_a));
    rep.peaks_b.push_back(std::move(peaks_b));
  }
  return rep;
}

}  // namespace qpr
