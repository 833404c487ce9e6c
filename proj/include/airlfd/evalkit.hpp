#pragma once

#include <optional>
#include <string>

#include "airlfd/detector.hpp"

namespace airlfd::evalkit {

struct DetectionReport {
  std::optional<int> onset_true;
  std::optional<int> onset_pred;
  std::optional<int> delay_files;   // onset_pred - onset_true
  std::optional<int> false_alarms;  // flagged strictly before onset_true
  std::optional<double> pdc;        // flag rate at/after onset_pred
  std::optional<double> auc;        // post-onset vs pre-onset ranking, ties 1/2
  double threshold = 0.0;
  int persistence = 1;
};

// Fields that need ground truth are omitted (not defaulted) when onset_true
// is absent; pdc needs only a predicted onset; auc additionally needs both a
// pre- and a post-onset group.
DetectionReport evaluate_run(const detector::ScoreSeries& series,
                             const detector::OnsetDecision& decision,
                             std::optional<int> onset_true);

// JSON text of the report, with the model name and config digest alongside.
std::string report_json(const DetectionReport& report, const std::string& model_name,
                        const std::string& config_digest);

}  // namespace airlfd::evalkit
