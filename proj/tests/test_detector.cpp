#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "airlfd/detector.hpp"
#include "airlfd/rng.hpp"
#include "test_util.hpp"

using namespace airlfd;
using namespace airlfd::detector;
using testutil::thrown_code;

namespace {

// Independent brute force over all 255 bin boundaries: assign each score to
// its bin, split at boundary b, maximize n0*n1*(mu0-mu1)^2 on the raw values.
// Ties keep the lower boundary. Mirrors the operation's contract, not its code.
double otsu_brute_force(const std::vector<double>& scores) {
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  auto bin_of = [&](double x) {
    const int bin = int((x - lo) / (hi - lo) * 256.0);
    return std::min(bin, 255);
  };
  double best = -1.0;
  int best_b = 0;
  for (int b = 0; b < 255; ++b) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (double x : scores) {
      if (bin_of(x) <= b) {
        n0 += 1;
        s0 += x;
      } else {
        n1 += 1;
        s1 += x;
      }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double mu0 = s0 / n0, mu1 = s1 / n1;
    const double between = n0 * n1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_b = b;
    }
  }
  return lo + (best_b + 1) * (hi - lo) / 256.0;
}

ScoreSeries series_from(const std::vector<double>& scores) {
  ScoreSeries series;
  for (std::size_t i = 0; i < scores.size(); ++i)
    series.push_back({int(i), 1, scores[i]});
  return series;
}

}  // namespace

TEST_CASE("invert_mean_prob realizes the Eq.-2 examples") {
  const std::array<double, 3> all_one{1.0, 1.0, 1.0};
  CHECK(invert_mean_prob(all_one) == 0.0);
  const std::array<double, 4> all_half{0.5, 0.5, 0.5, 0.5};
  CHECK(invert_mean_prob(all_half) == 0.5);
  const std::array<double, 3> mixed{0.9, 0.7, 0.8};
  CHECK(invert_mean_prob(mixed) == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("invert_mean_prob rejects an empty trajectory") {
  CHECK(thrown_code([] { invert_mean_prob(std::span<const double>{}); }) ==
        ErrorCode::EmptyTrajectory);
}

TEST_CASE("score stays in [0,1] and never decreases when a D drops") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> probs(1 + rng.below(20));
    for (auto& p : probs) p = rng.uniform();
    const double score = invert_mean_prob(probs);
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
    std::vector<double> lowered = probs;
    const std::size_t k = rng.below(probs.size());
    lowered[k] = probs[k] * rng.uniform();
    CHECK(invert_mean_prob(lowered) >= score);
  }
}

TEST_CASE("otsu matches the exhaustive boundary search on a two-cluster multiset") {
  std::vector<double> scores;
  for (int i = 0; i < 10; ++i) scores.push_back(0.1);
  for (int i = 0; i < 10; ++i) scores.push_back(0.9);
  const ThresholdSpec spec = otsu_threshold(scores);
  CHECK(spec.value > 0.1);
  CHECK(spec.value < 0.9);
  CHECK(spec.value == otsu_brute_force(scores));
  CHECK(spec.bins == 256);
}

TEST_CASE("otsu rejects degenerate input") {
  CHECK(thrown_code([] { otsu_threshold({0.4, 0.4, 0.4}); }) == ErrorCode::DegenerateScores);
  CHECK(thrown_code([] { otsu_threshold({0.4}); }) == ErrorCode::DegenerateScores);
}

TEST_CASE("otsu lands within one bin of the center of mirrored clusters") {
  // The clusters must overlap: with an empty gap every boundary inside it
  // ties, and the tie rule walks to the gap's lower edge.
  SplitMix64 rng(17);
  std::vector<double> scores;
  for (int i = 0; i < 200; ++i) {
    const double offset = 0.15 + 0.15 * rng.gaussian();
    scores.push_back(0.5 - offset);
    scores.push_back(0.5 + offset);
  }
  const ThresholdSpec spec = otsu_threshold(scores);
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double bin_width = (*hi_it - *lo_it) / 256.0;
  CHECK(std::abs(spec.value - 0.5) <= bin_width);
}

TEST_CASE("otsu equals the exhaustive oracle on random multisets") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(3 + rng.below(60));
    const int shape = int(rng.below(3));
    for (auto& x : scores) {
      if (shape == 0)
        x = rng.uniform();
      else if (shape == 1)
        x = (rng.below(2) ? 0.8 : 0.2) + 0.05 * rng.gaussian();
      else
        x = rng.below(5) * 0.2 + 0.01 * rng.gaussian();
    }
    const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    if (*lo_it == *hi_it) continue;
    CHECK(otsu_threshold(scores).value == otsu_brute_force(scores));
  }
}

TEST_CASE("kmeans2 on the hand-iterated fixture") {
  const ThresholdSpec spec = kmeans2_threshold({0.1, 0.2, 0.9});
  CHECK(spec.value == doctest::Approx(0.525).epsilon(1e-15));
}

TEST_CASE("kmeans2 on two points returns the midpoint") {
  CHECK(kmeans2_threshold({0.3, 0.8}).value == doctest::Approx(0.55).epsilon(1e-15));
}

TEST_CASE("kmeans2 is invariant to input order") {
  std::vector<double> scores{0.12, 0.7, 0.15, 0.9, 0.18, 0.85, 0.05};
  const double forward_value = kmeans2_threshold(scores).value;
  std::reverse(scores.begin(), scores.end());
  CHECK(kmeans2_threshold(scores).value == forward_value);
  SplitMix64 rng(7);
  airlfd::shuffle(scores, rng);
  CHECK(kmeans2_threshold(scores).value == forward_value);
}

TEST_CASE("kmeans2 threshold is a fixpoint of one more assignment pass") {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores(2 + rng.below(40));
    for (auto& x : scores) x = rng.uniform();
    const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
    if (*lo_it == *hi_it) continue;
    const double value = kmeans2_threshold(scores).value;
    double s0 = 0, s1 = 0, n0 = 0, n1 = 0;
    for (double x : scores) {
      if (x > value) {
        s1 += x;
        n1 += 1;
      } else {
        s0 += x;
        n0 += 1;
      }
    }
    REQUIRE(n0 > 0);
    REQUIRE(n1 > 0);
    CHECK(value == doctest::Approx(0.5 * (s0 / n0 + s1 / n1)).epsilon(1e-12));
  }
}

TEST_CASE("kmeans2 rejects degenerate input") {
  CHECK(thrown_code([] { kmeans2_threshold({0.5, 0.5}); }) == ErrorCode::DegenerateScores);
}

TEST_CASE("sigma_threshold arithmetic") {
  // {0.15, 0.25}: mean 0.2, population std 0.05
  const ThresholdSpec spec = sigma_threshold({0.15, 0.25}, 3.0);
  CHECK(spec.value == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(spec.k == 3.0);
  CHECK_FALSE(spec.degenerate);
}

TEST_CASE("sigma_threshold with k = 0 returns the mean") {
  CHECK(sigma_threshold({0.1, 0.3}, 0.0).value == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("sigma_threshold flags zero variance as degenerate") {
  const ThresholdSpec spec = sigma_threshold({0.1, 0.1}, 3.0);
  CHECK(spec.degenerate);
  CHECK(spec.value == 0.1);
}

TEST_CASE("sigma_threshold validates inputs") {
  CHECK(thrown_code([] { sigma_threshold({0.1}, 3.0); }) == ErrorCode::DegenerateScores);
  CHECK(thrown_code([] { sigma_threshold({0.1, 0.2}, -1.0); }) == ErrorCode::BadConfig);
}

TEST_CASE("detect_onset walks the definition") {
  ThresholdSpec t;
  t.value = 0.5;
  const OnsetDecision d1 = detect_onset(series_from({0, 0, 1, 1, 1}), t, 3);
  CHECK(d1.onset == 2);
  const OnsetDecision d2 = detect_onset(series_from({0, 1, 1, 0, 1, 1, 1}), t, 3);
  CHECK(d2.onset == 4);
  const OnsetDecision d3 = detect_onset(series_from({0.1, 0.2, 0.3}), t, 3);
  CHECK_FALSE(d3.has_onset());
  const OnsetDecision d4 = detect_onset(series_from({0.9}), t, 1);
  CHECK(d4.onset == 0);
}

TEST_CASE("detect_onset honors the boundary: scores equal to the threshold count") {
  ThresholdSpec t;
  t.value = 0.5;
  const OnsetDecision d = detect_onset(series_from({0.49, 0.5, 0.5, 0.5}), t, 3);
  CHECK(d.onset == 1);
}

TEST_CASE("detect_onset validates persistence") {
  ThresholdSpec t;
  t.value = 0.5;
  const ScoreSeries series = series_from({1, 1, 1});
  CHECK(thrown_code([&] { detect_onset(series, t, 0); }) == ErrorCode::BadConfig);
}

TEST_CASE("lowering the threshold never delays the onset") {
  SplitMix64 rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores(10 + rng.below(20));
    for (auto& x : scores) x = rng.uniform();
    const ScoreSeries series = series_from(scores);
    ThresholdSpec hi, lo;
    hi.value = rng.uniform();
    lo.value = hi.value - rng.uniform() * hi.value;
    const OnsetDecision at_hi = detect_onset(series, hi, 3);
    const OnsetDecision at_lo = detect_onset(series, lo, 3);
    if (at_hi.has_onset()) {
      REQUIRE(at_lo.has_onset());
      CHECK(at_lo.onset <= at_hi.onset);
    }
  }
}

TEST_CASE("onset invariant: the persistence run actually clears the threshold") {
  SplitMix64 rng(59);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> scores(15);
    for (auto& x : scores) x = rng.uniform();
    const ScoreSeries series = series_from(scores);
    ThresholdSpec t;
    t.value = rng.uniform();
    const int m = 1 + int(rng.below(4));
    const OnsetDecision d = detect_onset(series, t, m);
    if (d.has_onset()) {
      for (int j = d.onset; j < d.onset + m; ++j)
        CHECK(series[size_t(j)].score >= t.value);
      // earliest: no prior index starts a qualifying run
      for (int i = 0; i < d.onset; ++i) {
        bool all = true;
        for (int j = i; j < i + m; ++j)
          if (!(series[size_t(j)].score >= t.value)) {
            all = false;
            break;
          }
        CHECK_FALSE(all);
      }
    }
  }
}

TEST_CASE("threshold method names round-trip") {
  CHECK(parse_threshold_method("otsu") == ThresholdMethod::Otsu);
  CHECK(parse_threshold_method("kmeans2") == ThresholdMethod::KMeans2);
  CHECK(parse_threshold_method("sigma_rule") == ThresholdMethod::SigmaRule);
  CHECK(std::string(method_str(ThresholdMethod::Otsu)) == "otsu");
  CHECK(thrown_code([] { parse_threshold_method("quantile"); }) == ErrorCode::BadConfig);
}
