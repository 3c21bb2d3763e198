#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssb/detect.hpp"
#include "ssb/rng.hpp"

using namespace ssb;
using namespace ssb::detect;

namespace {

// Brute-force reference: the smallest observed score that, used as the
// threshold with the strict `score > threshold` rule, keeps the realized
// false-alarm fraction at or below the target.
double oracle_threshold(std::vector<double> scores, double target_pfa) {
  std::sort(scores.begin(), scores.end());
  const double n = static_cast<double>(scores.size());
  for (double cand : scores) {
    const auto above = std::count_if(scores.begin(), scores.end(),
                                     [&](double s) { return s > cand; });
    if (static_cast<double>(above) / n <= target_pfa) return cand;
  }
  return scores.back();
}

}  // namespace

TEST_CASE("energy statistic sums squared magnitudes") {
  sigsim::SensingWindow w;
  w.samples = {{1.0f, 2.0f}, {3.0f, 4.0f}};
  CHECK(energy_statistic(w) == doctest::Approx(30.0).epsilon(1e-12));
  w.samples = {{0.5f, 0.0f}};
  CHECK(energy_statistic(w) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("threshold calibration on a known grid") {
  std::vector<double> scores(100);
  for (int i = 0; i < 100; ++i) scores[i] = i + 1;  // 1..100
  const double thr = calibrate_threshold(scores, 0.01);
  CHECK(thr == 99.0);
  const auto above =
      std::count_if(scores.begin(), scores.end(), [&](double s) { return s > thr; });
  CHECK(above == 1);
}

TEST_CASE("calibration matches the brute-force oracle") {
  Rng rng(31);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = 5 + rng.below(300);
    std::vector<double> scores(n);
    for (auto& s : scores) s = rng.uniform() * 50.0;
    if (iter % 3 == 0)  // force ties in a third of the trials
      for (auto& s : scores) s = std::floor(s);
    const double pfa = 0.005 + 0.3 * rng.uniform();
    CHECK(calibrate_threshold(scores, pfa) == oracle_threshold(scores, pfa));
  }
}

TEST_CASE("calibration handles ties conservatively") {
  // 90 copies of 1.0 and 10 copies of 2.0; any threshold below 2 fires on
  // ten percent of the idle set
  std::vector<double> scores(100, 1.0);
  std::fill(scores.begin() + 90, scores.end(), 2.0);
  CHECK(calibrate_threshold(scores, 0.05) == 2.0);
  CHECK(calibrate_threshold(scores, 0.10) == 1.0);
  CHECK(calibrate_threshold(scores, 0.5) == 1.0);
}

TEST_CASE("calibration commutes with increasing transforms") {
  Rng rng(32);
  std::vector<double> scores(173);
  for (auto& s : scores) s = rng.uniform() * 4.0 - 2.0;
  for (double pfa : {0.01, 0.07, 0.2}) {
    const double thr = calibrate_threshold(scores, pfa);
    std::vector<double> mapped(scores.size());
    std::transform(scores.begin(), scores.end(), mapped.begin(),
                   [](double s) { return std::exp(s); });
    CHECK(calibrate_threshold(mapped, pfa) ==
          doctest::Approx(std::exp(thr)).epsilon(1e-12));
  }
}

TEST_CASE("calibration rejects bad inputs") {
  std::vector<double> empty;
  CHECK_THROWS_AS(calibrate_threshold(empty, 0.01), std::invalid_argument);
  std::vector<double> one{1.0};
  CHECK_THROWS_AS(calibrate_threshold(one, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_threshold(one, 1.0), std::invalid_argument);
  CHECK_NOTHROW(calibrate_threshold(one, 0.5));
}

TEST_CASE("evaluate computes conditional rates") {
  ScoreSet s;
  s.scores = {0.1, 0.9, 0.8, 0.2, 0.7, 0.4};
  s.labels = {0, 1, 1, 0, 1, 1};
  const auto m = evaluate(s, 0.5);
  CHECK(m.n_busy == 4);
  CHECK(m.n_idle == 2);
  CHECK(m.p_d == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.p_fa == doctest::Approx(0.0).scale(1.0));
  CHECK(m.p_fd == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(m.threshold == 0.5);

  // scores equal to the threshold decide idle
  ScoreSet tie;
  tie.scores = {0.5, 0.5};
  tie.labels = {1, 0};
  const auto mt = evaluate(tie, 0.5);
  CHECK(mt.p_d == 0.0);
  CHECK(mt.p_fa == 0.0);
}

TEST_CASE("evaluate always reports p_fd = 1 - p_d") {
  Rng rng(33);
  for (int iter = 0; iter < 50; ++iter) {
    ScoreSet s;
    const std::size_t n = 10 + rng.below(100);
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(rng.uniform());
      s.labels.push_back(static_cast<std::uint8_t>(i % 2));
    }
    const auto m = evaluate(s, rng.uniform());
    CHECK(m.p_fd == doctest::Approx(1.0 - m.p_d).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("evaluate rejects degenerate inputs") {
  ScoreSet s;
  s.scores = {0.1, 0.2};
  s.labels = {1, 1};
  CHECK_THROWS_AS(evaluate(s, 0.5), std::invalid_argument);
  s.labels = {0, 0};
  CHECK_THROWS_AS(evaluate(s, 0.5), std::invalid_argument);
  s.labels = {0};
  CHECK_THROWS_AS(evaluate(s, 0.5), std::invalid_argument);
}

TEST_CASE("calibrated threshold generalizes to fresh idle data") {
  // calibrate on one idle sample, evaluate on an independent one: realized
  // false-alarm rate stays inside a 4 sigma binomial band around the target
  const std::size_t n = 10000;
  const double target = 0.01;
  auto draw = [](std::uint64_t seed, std::size_t count) {
    Rng rng(seed);
    std::vector<double> out(count);
    for (auto& s : out) {
      double t = 0.0;
      for (int k = 0; k < 16; ++k) {  // chi-square-ish positive statistic
        const double g = rng.normal();
        t += g * g;
      }
      s = t;
    }
    return out;
  };
  const auto cal = draw(101, n);
  const double thr = calibrate_threshold(cal, target);

  ScoreSet fresh;
  const auto idle = draw(202, n);
  for (double v : idle) {
    fresh.scores.push_back(v);
    fresh.labels.push_back(0);
  }
  fresh.scores.push_back(1e9);  // one busy example to satisfy evaluate
  fresh.labels.push_back(1);

  const auto m = evaluate(fresh, thr);
  const double sigma = std::sqrt(target * (1.0 - target) / n);
  CHECK(std::abs(m.p_fa - target) < 4.0 * sigma);
}
