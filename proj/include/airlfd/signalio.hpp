#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "airlfd/error.hpp"

namespace airlfd::signalio {

using Eigen::VectorXd;
using FeatureVec = Eigen::VectorXd;

// One ordered vibration capture; trajectory_id is its position in the run.
struct Recording {
  int trajectory_id = 0;
  int channel_id = 0;
  VectorXd samples;
};

// Z-score parameters fitted on healthy data only. Population std.
struct Normalizer {
  double mean = 0.0;
  double std = 1.0;
};

enum class FeatureKind { Raw, Decimate, Stats };

struct FeatureMode {
  FeatureKind kind = FeatureKind::Decimate;
  int factor = 4;  // decimation factor, used by Decimate only

  static FeatureMode parse(const std::string& text);  // "raw" | "stats" | "decimate(k)"
  std::string str() const;
  int state_dim(int win_len) const;
};

struct FeatureConfig {
  int win_len = 256;
  int stride = 256;
  FeatureMode mode{};

  int state_dim() const { return mode.state_dim(win_len); }
};

// Proxy-action transition: a equals s_next by construction.
struct Transition {
  VectorXd s, a, s_next;
  int trajectory_id = 0;
};

// Transitions grouped by trajectory, time-ordered within each group.
struct TransitionSet {
  std::vector<Transition> transitions;
  std::vector<int> trajectory_ids;                          // one per group, ascending order
  std::vector<std::pair<std::size_t, std::size_t>> spans;   // [begin, end) into transitions

  std::size_t size() const { return transitions.size(); }
  std::size_t trajectory_count() const { return trajectory_ids.size(); }
};

struct WindowedTrajectory {
  int trajectory_id = 0;
  std::vector<FeatureVec> windows;
};

// Orders the trajectories of a run. healthy_lo/hi are inclusive trajectory
// indices; onset_true < 0 means "no known onset" (serialized as null).
struct RunManifest {
  std::vector<std::string> files;  // relative to the manifest's directory
  int channel = 0;
  int healthy_lo = 0;
  int healthy_hi = 0;
  int onset_true = -1;
  std::string config_digest;  // empty = omitted

  bool has_onset() const { return onset_true >= 0; }
};

RunManifest load_manifest(const std::string& path);
void save_manifest(const RunManifest& manifest, const std::string& path);

// The 7 per-window statistics: mean, std, RMS, kurtosis, skewness, crest
// factor, peak. Kurtosis, skewness and crest factor of a zero-variance
// window are defined as 0.
template <typename Derived>
Eigen::Matrix<double, 7, 1> window_stats(const Eigen::MatrixBase<Derived>& window) {
  const Eigen::ArrayXd w = window.derived().template cast<double>().array();
  Eigen::Matrix<double, 7, 1> out;
  const double mean = w.mean();
  const double var = (w - mean).square().mean();
  const double stdev = std::sqrt(var);
  const double rms = std::sqrt(w.square().mean());
  const double peak = w.abs().maxCoeff();
  out(0) = mean;
  out(1) = stdev;
  out(2) = rms;
  out(3) = stdev > 0.0 ? (w - mean).pow(4).mean() / (var * var) : 0.0;
  out(4) = stdev > 0.0 ? (w - mean).pow(3).mean() / (var * stdev) : 0.0;
  out(5) = stdev > 0.0 ? peak / rms : 0.0;
  out(6) = peak;
  return out;
}

// Reads one column of a CSV file (rows = samples, columns = channels). A
// single non-numeric first row is treated as a header and skipped.
Recording load_recording(const std::string& path, int channel, int trajectory_id = 0);

// Mean and population std over the concatenation of all healthy samples.
Normalizer fit_normalizer(const std::vector<Recording>& healthy);

// Z-scores the recording and emits floor((N - win_len)/stride) + 1 feature
// vectors, one per window, transformed per the feature mode.
std::vector<FeatureVec> normalize_and_window(const Recording& rec, const Normalizer& norm,
                                             const FeatureConfig& cfg);

// (w_k, w_{k+1}, w_{k+1}) transitions per trajectory; never crosses
// trajectory boundaries.
TransitionSet build_transitions(const std::vector<WindowedTrajectory>& trajectories);

}  // namespace airlfd::signalio
