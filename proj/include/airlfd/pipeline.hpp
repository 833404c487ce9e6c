#pragma once

#include <string>
#include <vector>

#include "airlfd/detector.hpp"
#include "airlfd/runconfig.hpp"
#include "airlfd/signalio.hpp"

namespace airlfd::pipeline {

// Parsed scores CSV (the file format shared by airl and baseline scoring).
struct ScoresDoc {
  detector::ScoreSeries series;
  std::vector<int> flags;
  double threshold = 0.0;
  std::string digest;
};

void write_scores_csv(const std::string& path, const detector::ScoreSeries& series,
                      double threshold, const std::string& digest);
ScoresDoc read_scores_csv(const std::string& path);

// Inclusive trajectory-id ranges of the healthy train/validation split:
// the last ceil(val_frac * H) healthy trajectories are validation and are
// never used for fitting.
struct HealthySplit {
  int train_lo = 0, train_hi = -1;
  int val_lo = 0, val_hi = -1;
};

HealthySplit healthy_split(const signalio::RunManifest& manifest, double val_frac);

// One command each; all read/write files per cfg and throw airlfd::Error.
void run_synth(const RunConfig& cfg);
void run_train(const RunConfig& cfg);
void run_score(const RunConfig& cfg);
void run_detect(const RunConfig& cfg);
void run_baseline(const RunConfig& cfg);
void run_eval(const RunConfig& cfg);
void run_plot(const RunConfig& cfg);

struct GradCheckRow {
  std::string name;
  double max_rel_err = 0.0;
};

// Finite-difference verification of every trained network's gradient path.
std::vector<GradCheckRow> run_gradcheck(const RunConfig& cfg);

}  // namespace airlfd::pipeline
