#include "airlfd/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace airlfd::detector {

namespace {

constexpr int kOtsuBins = 256;

void require_two_distinct(const std::vector<double>& scores, const char* who) {
  if (scores.size() < 2)
    fail(ErrorCode::DegenerateScores, std::string(who) + ": need at least 2 scores");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi)
    fail(ErrorCode::DegenerateScores, std::string(who) + ": all scores equal");
}

}  // namespace

ThresholdMethod parse_threshold_method(const std::string& text) {
  if (text == "otsu") return ThresholdMethod::Otsu;
  if (text == "kmeans2") return ThresholdMethod::KMeans2;
  if (text == "sigma_rule") return ThresholdMethod::SigmaRule;
  fail(ErrorCode::BadConfig, "unknown threshold method '" + text + "'");
}

const char* method_str(ThresholdMethod method) {
  switch (method) {
    case ThresholdMethod::Otsu: return "otsu";
    case ThresholdMethod::KMeans2: return "kmeans2";
    case ThresholdMethod::SigmaRule: return "sigma_rule";
  }
  return "?";
}

double invert_mean_prob(std::span<const double> probs) {
  if (probs.empty()) fail(ErrorCode::EmptyTrajectory, "no transitions to score");
  double sum = 0.0;
  for (double p : probs) sum += p;
  return 1.0 - sum / static_cast<double>(probs.size());
}

double trajectory_score(const airlcore::AirlModel& model,
                        std::span<const signalio::Transition> transitions, double logit_clamp) {
  if (transitions.empty()) fail(ErrorCode::EmptyTrajectory, "no transitions to score");
  const Eigen::VectorXd probs = airlcore::disc_prob_batch(
      model.disc, model.policy, airlcore::pack(transitions), logit_clamp);
  return invert_mean_prob(std::span<const double>(probs.data(),
                                                  static_cast<std::size_t>(probs.size())));
}

ScoreSeries score_series(const airlcore::AirlModel& model, const signalio::TransitionSet& set,
                         double logit_clamp) {
  ScoreSeries series;
  series.reserve(set.trajectory_count());
  for (std::size_t g = 0; g < set.trajectory_count(); ++g) {
    const auto [begin, end] = set.spans[g];
    TrajectoryScore ts;
    ts.trajectory_id = set.trajectory_ids[g];
    ts.n_transitions = static_cast<int>(end - begin);
    ts.score = trajectory_score(
        model, std::span<const signalio::Transition>(set.transitions.data() + begin, end - begin),
        logit_clamp);
    series.push_back(ts);
  }
  return series;
}

ThresholdSpec otsu_threshold(const std::vector<double>& scores) {
  require_two_distinct(scores, "otsu_threshold");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  const double width = (hi - lo) / kOtsuBins;

  std::vector<double> count(kOtsuBins, 0.0), mass(kOtsuBins, 0.0);
  for (double x : scores) {
    int bin = static_cast<int>((x - lo) / (hi - lo) * kOtsuBins);
    bin = std::min(bin, kOtsuBins - 1);
    count[static_cast<std::size_t>(bin)] += 1.0;
    mass[static_cast<std::size_t>(bin)] += x;
  }

  const double total = static_cast<double>(scores.size());
  double total_mass = 0.0;
  for (double m : mass) total_mass += m;
  double best = -1.0;
  int best_boundary = 0;
  double n0 = 0.0, m0 = 0.0;
  for (int b = 0; b < kOtsuBins - 1; ++b) {
    n0 += count[static_cast<std::size_t>(b)];
    m0 += mass[static_cast<std::size_t>(b)];
    const double n1 = total - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double mu0 = m0 / n0;
    const double mu1 = (total_mass - m0) / n1;
    const double between = n0 * n1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {  // strict: ties keep the lower boundary
      best = between;
      best_boundary = b;
    }
  }

  ThresholdSpec spec;
  spec.method = ThresholdMethod::Otsu;
  spec.bins = kOtsuBins;
  spec.value = lo + (best_boundary + 1) * width;
  return spec;
}

ThresholdSpec kmeans2_threshold(const std::vector<double>& scores) {
  require_two_distinct(scores, "kmeans2_threshold");
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  double c0 = *lo_it, c1 = *hi_it;

  std::vector<bool> high(scores.size(), false);
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (c0 + c1);
    bool changed = false;
    double sum0 = 0.0, sum1 = 0.0;
    std::size_t n0 = 0, n1 = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      const bool h = scores[k] > mid;  // ties join the lower cluster
      if (h != high[k]) {
        high[k] = h;
        changed = true;
      }
      if (h) {
        sum1 += scores[k];
        ++n1;
      } else {
        sum0 += scores[k];
        ++n0;
      }
    }
    if (n0 > 0) c0 = sum0 / static_cast<double>(n0);
    if (n1 > 0) c1 = sum1 / static_cast<double>(n1);
    if (!changed && iter > 0) break;
  }

  ThresholdSpec spec;
  spec.method = ThresholdMethod::KMeans2;
  spec.value = 0.5 * (c0 + c1);
  return spec;
}

ThresholdSpec sigma_threshold(const std::vector<double>& healthy_scores, double k) {
  if (healthy_scores.size() < 2)
    fail(ErrorCode::DegenerateScores, "sigma_threshold: need at least 2 healthy scores");
  if (k < 0.0) fail(ErrorCode::BadConfig, "sigma_threshold: k must be >= 0");
  const double n = static_cast<double>(healthy_scores.size());
  double mean = 0.0;
  for (double x : healthy_scores) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : healthy_scores) var += (x - mean) * (x - mean);
  var /= n;
  const double stdev = std::sqrt(var);

  ThresholdSpec spec;
  spec.method = ThresholdMethod::SigmaRule;
  spec.k = k;
  spec.degenerate = stdev == 0.0;
  spec.value = spec.degenerate ? mean : mean + k * stdev;
  return spec;
}

OnsetDecision detect_onset(const ScoreSeries& series, const ThresholdSpec& threshold,
                           int persistence) {
  if (persistence < 1) fail(ErrorCode::BadConfig, "persistence must be >= 1");
  OnsetDecision decision;
  decision.persistence = persistence;
  decision.threshold = threshold;
  const std::size_t m = static_cast<std::size_t>(persistence);
  if (series.size() >= m) {
    for (std::size_t i = 0; i + m <= series.size(); ++i) {
      bool all = true;
      for (std::size_t j = i; j < i + m; ++j) {
        if (!(series[j].score >= threshold.value)) {
          all = false;
          break;
        }
      }
      if (all) {
        decision.onset = series[i].trajectory_id;
        break;
      }
    }
  }
  return decision;
}

}  // namespace airlfd::detector
