#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ssb/sigsim.hpp"

namespace ssb::detect {

struct ScoreSet {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

struct Metrics {
  double p_d = 0.0;
  double p_fa = 0.0;
  double p_fd = 0.0;  // always 1 - p_d
  double threshold = 0.0;
  std::uint64_t n_busy = 0;
  std::uint64_t n_idle = 0;
};

// Energy statistic T = sum_i |x_i|^2. Accumulated in double regardless of
// sample storage precision.
double energy_statistic(const sigsim::SensingWindow& w);

// Empirical (1 - target_pfa) quantile of the idle scores, taking the higher
// order statistic on non-integer ranks so the realized false-alarm fraction
// on the calibration set never exceeds the target. Decision rule everywhere:
// score > threshold  =>  busy.
double calibrate_threshold(std::span<const double> idle_scores,
                           double target_pfa);

// Conditional decision probabilities at a fixed threshold. Both classes must
// be present.
Metrics evaluate(const ScoreSet& s, double threshold);

}  // namespace ssb::detect
