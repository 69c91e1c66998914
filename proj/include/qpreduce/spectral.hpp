#pragma once

#include <vector>

#include "qpreduce/simulate.hpp"

namespace qpr {

struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> density;
};

struct PsdConfig {
  int segment_len = 4096;
  double overlap_frac = 0.5;
  double rel_peak_db = -20.0;  // peaks below this level relative to the maximum are ignored
};

// Averaged Hann-windowed periodograms, one-sided, window-power normalized.
// segment_len must not exceed the signal length; non power-of-two segments are
// zero-padded to the next power of two.
Psd welch_psd(const std::vector<double>& signal, double sample_rate_hz,
              int segment_len, double overlap_frac);

struct PsdPeak {
  double freq_hz = 0.0;
  double power = 0.0;
};

// Local maxima above the relative threshold, sorted by descending power.
std::vector<PsdPeak> psd_peaks(const Psd& psd, double rel_db);

struct ComparisonReport {
  Eigen::VectorXd rms_error;
  Eigen::VectorXd max_error;
  std::vector<std::vector<PsdPeak>> peaks_a;  // per state
  std::vector<std::vector<PsdPeak>> peaks_b;
  bool psd_match = false;  // every peak of a matched within one bin in b
  double bin_width_hz = 0.0;
};

// Per-state error metrics plus peak matching of the Welch spectra. b is
// resampled onto a's grid by linear interpolation when the grids differ.
ComparisonReport compare(const Trajectory& a, const Trajectory& b,
                         const PsdConfig& cfg);

}  // namespace qpr
