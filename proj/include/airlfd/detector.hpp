#pragma once

#include <span>
#include <string>
#include <vector>

#include "airlfd/airlcore.hpp"

namespace airlfd::detector {

// Per-trajectory anomaly score: 1 - mean discriminator confidence.
struct TrajectoryScore {
  int trajectory_id = 0;
  int n_transitions = 0;
  double score = 0.0;
};

using ScoreSeries = std::vector<TrajectoryScore>;

enum class ThresholdMethod { Otsu, KMeans2, SigmaRule };

ThresholdMethod parse_threshold_method(const std::string& text);
const char* method_str(ThresholdMethod method);

struct ThresholdSpec {
  ThresholdMethod method = ThresholdMethod::SigmaRule;
  double value = 0.0;
  int bins = 0;          // otsu only
  double k = 0.0;        // sigma_rule only
  bool degenerate = false;  // sigma_rule with zero variance
};

// onset < 0 means "none". If onset = i, the m consecutive trajectories
// starting at i all scored >= threshold.value.
struct OnsetDecision {
  int onset = -1;
  int persistence = 3;
  ThresholdSpec threshold;

  bool has_onset() const { return onset >= 0; }
};

// The Eq.-2 aggregation on its own, so it can be tested against fixed
// discriminator outputs.
double invert_mean_prob(std::span<const double> probs);

double trajectory_score(const airlcore::AirlModel& model,
                        std::span<const signalio::Transition> transitions,
                        double logit_clamp = airlcore::kDefaultLogitClamp);

ScoreSeries score_series(const airlcore::AirlModel& model, const signalio::TransitionSet& set,
                         double logit_clamp = airlcore::kDefaultLogitClamp);

// 256-bin histogram threshold maximizing between-group variance; ties go to
// the lower boundary.
ThresholdSpec otsu_threshold(const std::vector<double>& scores);

// 1-D 2-means, centers initialized at min and max, iterated to assignment
// fixpoint; threshold = midpoint of the final centers.
ThresholdSpec kmeans2_threshold(const std::vector<double>& scores);

// mean + k * population std of healthy-validation scores.
ThresholdSpec sigma_threshold(const std::vector<double>& healthy_scores, double k = 3.0);

// Earliest i with persistence consecutive scores >= threshold.
OnsetDecision detect_onset(const ScoreSeries& series, const ThresholdSpec& threshold,
                           int persistence = 3);

}  // namespace airlfd::detector
