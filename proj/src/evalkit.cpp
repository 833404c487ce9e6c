#include "airlfd/evalkit.hpp"

#include <json.hpp>

namespace airlfd::evalkit {

DetectionReport evaluate_run(const detector::ScoreSeries& series,
                             const detector::OnsetDecision& decision,
                             std::optional<int> onset_true) {
  if (series.empty()) fail(ErrorCode::EmptyInput, "evaluate_run: empty score series");

  DetectionReport report;
  report.threshold = decision.threshold.value;
  report.persistence = decision.persistence;
  report.onset_true = onset_true;
  if (decision.has_onset()) report.onset_pred = decision.onset;

  if (report.onset_pred) {
    int post = 0, flagged = 0;
    for (const auto& ts : series) {
      if (ts.trajectory_id >= *report.onset_pred) {
        ++post;
        if (ts.score >= decision.threshold.value) ++flagged;
      }
    }
    if (post > 0) report.pdc = static_cast<double>(flagged) / static_cast<double>(post);
  }

  if (onset_true) {
    if (report.onset_pred) report.delay_files = *report.onset_pred - *onset_true;
    int alarms = 0;
    for (const auto& ts : series)
      if (ts.trajectory_id < *onset_true && ts.score >= decision.threshold.value) ++alarms;
    report.false_alarms = alarms;

    // Mann-Whitney AUC: P(post-onset score > pre-onset score), ties half.
    double wins = 0.0;
    long pairs = 0;
    for (const auto& post : series) {
      if (post.trajectory_id < *onset_true) continue;
      for (const auto& pre : series) {
        if (pre.trajectory_id >= *onset_true) continue;
        ++pairs;
        if (post.score > pre.score)
          wins += 1.0;
        else if (post.score == pre.score)
          wins += 0.5;
      }
    }
    if (pairs > 0) report.auc = wins / static_cast<double>(pairs);
  }
  return report;
}

std::string report_json(const DetectionReport& report, const std::string& model_name,
                        const std::string& config_digest) {
  nlohmann::json doc;
  auto put_int = [&doc](const char* key, const std::optional<int>& v) {
    doc[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  auto put_real = [&doc](const char* key, const std::optional<double>& v) {
    doc[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  put_int("onset_true", report.onset_true);
  put_int("onset_pred", report.onset_pred);
  put_int("delay_files", report.delay_files);
  put_int("false_alarms", report.false_alarms);
  put_real("pdc", report.pdc);
  put_real("auc", report.auc);
  doc["threshold"] = report.threshold;
  doc["persistence"] = report.persistence;
  doc["model"] = model_name;
  doc["config_digest"] = config_digest;
  return doc.dump(2) + "\n";
}

}  // namespace airlfd::evalkit
