#include "ssb/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssb::detect {

double energy_statistic(const sigsim::SensingWindow& w) {
  double t = 0.0;
  for (const auto& c : w.samples) {
    const double re = c.real();
    const double im = c.imag();
    t += re * re + im * im;
  }
  return t;
}

double calibrate_threshold(std::span<const double> idle_scores,
                           double target_pfa) {
  if (idle_scores.empty())
    throw std::invalid_argument("calibrate_threshold: no idle scores");
  if (!(target_pfa > 0.0 && target_pfa < 1.0))
    throw std::invalid_argument("calibrate_threshold: target_pfa not in (0,1)");

  std::vector<double> sorted(idle_scores.begin(), idle_scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // 1-based rank of the (1 - pfa) quantile, rounded up (conservative side)
  std::size_t rank = static_cast<std::size_t>(
      std::ceil((1.0 - target_pfa) * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

Metrics evaluate(const ScoreSet& s, double threshold) {
  if (s.scores.size() != s.labels.size())
    throw std::invalid_argument("evaluate: scores/labels length mismatch");

  std::uint64_t n_busy = 0, n_idle = 0, hit = 0, fa = 0;
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    if (s.labels[i]) {
      ++n_busy;
      if (s.scores[i] > threshold) ++hit;
    } else {
      ++n_idle;
      if (s.scores[i] > threshold) ++fa;
    }
  }
  if (n_busy == 0 || n_idle == 0)
    throw std::invalid_argument(
        "evaluate: both classes required (conditional probabilities "
        "undefined)");

  Metrics m;
  m.n_busy = n_busy;
  m.n_idle = n_idle;
  m.threshold = threshold;
  m.p_d = static_cast<double>(hit) / static_cast<double>(n_busy);
  m.p_fa = static_cast<double>(fa) / static_cast<double>(n_idle);
  m.p_fd = 1.0 - m.p_d;
  return m;
}

}  // namespace ssb::detect
