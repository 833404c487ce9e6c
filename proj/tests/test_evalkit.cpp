#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "airlfd/evalkit.hpp"
#include "airlfd/rng.hpp"
#include "test_util.hpp"

using namespace airlfd;
using namespace airlfd::evalkit;
using detector::OnsetDecision;
using detector::ScoreSeries;
using detector::ThresholdSpec;
using testutil::thrown_code;

namespace {

ScoreSeries series_of(const std::vector<double>& scores) {
  ScoreSeries series;
  for (std::size_t i = 0; i < scores.size(); ++i)
    series.push_back({int(i), 1, scores[i]});
  return series;
}

OnsetDecision decision_at(int onset, double threshold, int persistence = 3) {
  OnsetDecision d;
  d.onset = onset;
  d.persistence = persistence;
  d.threshold.method = detector::ThresholdMethod::SigmaRule;
  d.threshold.value = threshold;
  return d;
}

}  // namespace

TEST_CASE("detection delay on a 300-file run with a -101-file lead") {
  std::vector<double> scores(300, 0.2);
  for (int i = 163; i < 300; ++i) scores[size_t(i)] = 0.8;
  const ScoreSeries series = series_of(scores);

  const DetectionReport report = evaluate_run(series, decision_at(163, 0.5), 264);
  REQUIRE(report.onset_pred.has_value());
  REQUIRE(report.delay_files.has_value());
  CHECK(*report.onset_pred == 163);
  CHECK(*report.delay_files == -101);
  REQUIRE(report.false_alarms.has_value());
  CHECK(*report.false_alarms == 101);  // trajectories 163..263 score 0.8 before truth
  REQUIRE(report.pdc.has_value());
  CHECK(*report.pdc == 1.0);
}

TEST_CASE("pdc counts the flag rate at and after the predicted onset") {
  const ScoreSeries series = series_of({0.1, 0.9, 0.9, 0.1, 0.9});
  const DetectionReport report = evaluate_run(series, decision_at(1, 0.5), std::nullopt);
  REQUIRE(report.pdc.has_value());
  CHECK(*report.pdc == 0.75);  // flags [1,1,0,1]
  CHECK_FALSE(report.delay_files.has_value());
  CHECK_FALSE(report.false_alarms.has_value());
  CHECK_FALSE(report.auc.has_value());
}

TEST_CASE("pdc is 1 when every post-onset score clears the threshold") {
  const ScoreSeries series = series_of({0.1, 0.6, 0.7, 0.8});
  const DetectionReport report = evaluate_run(series, decision_at(1, 0.5), std::nullopt);
  REQUIRE(report.pdc.has_value());
  CHECK(*report.pdc == 1.0);
}

TEST_CASE("auc is 1 under perfect separation and 1/2 under pure ties") {
  const DetectionReport sep =
      evaluate_run(series_of({0.1, 0.9}), decision_at(1, 0.5), 1);
  REQUIRE(sep.auc.has_value());
  CHECK(*sep.auc == 1.0);

  const DetectionReport tied =
      evaluate_run(series_of({0.5, 0.5}), decision_at(1, 0.5), 1);
  REQUIRE(tied.auc.has_value());
  CHECK(*tied.auc == 0.5);
}

TEST_CASE("auc survives any strictly increasing rescaling of the scores") {
  SplitMix64 rng(7);
  std::vector<double> scores;
  for (int i = 0; i < 40; ++i) scores.push_back(rng.uniform());
  scores[5] = scores[30];  // force at least one tie across the split

  std::vector<double> warped;
  for (double s : scores) warped.push_back(std::exp(3.0 * s) - 1.0);

  const OnsetDecision decision = decision_at(12, 0.5);
  const DetectionReport a = evaluate_run(series_of(scores), decision, 20);
  const DetectionReport b = evaluate_run(series_of(warped), decision, 20);
  REQUIRE(a.auc.has_value());
  REQUIRE(b.auc.has_value());
  CHECK(*a.auc == *b.auc);
  CHECK(*a.auc >= 0.0);
  CHECK(*a.auc <= 1.0);
}

TEST_CASE("delay can be positive and false alarms count pre-onset flags") {
  const ScoreSeries series = series_of({0.9, 0.1, 0.9, 0.1, 0.8, 0.9, 0.9});
  const DetectionReport report = evaluate_run(series, decision_at(4, 0.5), 3);
  REQUIRE(report.delay_files.has_value());
  CHECK(*report.delay_files == 1);
  REQUIRE(report.false_alarms.has_value());
  CHECK(*report.false_alarms == 2);  // trajectories 0 and 2
}

TEST_CASE("false alarms is zero when nothing fires before the true onset") {
  const ScoreSeries series = series_of({0.1, 0.2, 0.1, 0.9, 0.9});
  const DetectionReport report = evaluate_run(series, decision_at(3, 0.5), 3);
  REQUIRE(report.false_alarms.has_value());
  CHECK(*report.false_alarms == 0);
}

TEST_CASE("missing ground truth omits truth-dependent fields rather than defaulting them") {
  const ScoreSeries series = series_of({0.1, 0.9, 0.9, 0.9});

  const DetectionReport with_pred = evaluate_run(series, decision_at(1, 0.5), std::nullopt);
  CHECK_FALSE(with_pred.onset_true.has_value());
  CHECK_FALSE(with_pred.delay_files.has_value());
  CHECK_FALSE(with_pred.false_alarms.has_value());
  CHECK_FALSE(with_pred.auc.has_value());
  CHECK(with_pred.pdc.has_value());

  OnsetDecision none;
  none.onset = -1;
  none.threshold.value = 0.5;
  const DetectionReport no_pred = evaluate_run(series, none, std::nullopt);
  CHECK_FALSE(no_pred.onset_pred.has_value());
  CHECK_FALSE(no_pred.pdc.has_value());
  CHECK_FALSE(no_pred.delay_files.has_value());
}

TEST_CASE("missed detection with ground truth still reports alarms and auc") {
  const ScoreSeries series = series_of({0.1, 0.2, 0.6, 0.7});
  OnsetDecision none;
  none.onset = -1;
  none.threshold.value = 0.9;
  const DetectionReport report = evaluate_run(series, none, 2);
  CHECK_FALSE(report.onset_pred.has_value());
  CHECK_FALSE(report.delay_files.has_value());
  CHECK_FALSE(report.pdc.has_value());
  REQUIRE(report.false_alarms.has_value());
  CHECK(*report.false_alarms == 0);
  REQUIRE(report.auc.has_value());
  CHECK(*report.auc == 1.0);
}

TEST_CASE("evaluate_run rejects an empty series") {
  CHECK(thrown_code([] { evaluate_run({}, OnsetDecision{}, 3); }) == ErrorCode::EmptyInput);
}

TEST_CASE("report_json carries every field, nulls for omissions, and the digest") {
  const ScoreSeries series = series_of({0.1, 0.9, 0.9, 0.9});
  const DetectionReport report = evaluate_run(series, decision_at(1, 0.5, 2), 1);
  const std::string text = report_json(report, "airl", "abc123");

  const nlohmann::json doc = nlohmann::json::parse(text);
  CHECK(doc.at("onset_true").get<int>() == 1);
  CHECK(doc.at("onset_pred").get<int>() == 1);
  CHECK(doc.at("delay_files").get<int>() == 0);
  CHECK(doc.at("false_alarms").get<int>() == 0);
  CHECK(doc.at("pdc").get<double>() == 1.0);
  CHECK(doc.at("auc").get<double>() == 1.0);
  CHECK(doc.at("threshold").get<double>() == 0.5);
  CHECK(doc.at("persistence").get<int>() == 2);
  CHECK(doc.at("model").get<std::string>() == "airl");
  CHECK(doc.at("config_digest").get<std::string>() == "abc123");

  const DetectionReport bare =
      evaluate_run(series, decision_at(1, 0.5), std::nullopt);
  const nlohmann::json doc2 = nlohmann::json::parse(report_json(bare, "airl", "abc123"));
  CHECK(doc2.at("onset_true").is_null());
  CHECK(doc2.at("delay_files").is_null());
  CHECK(doc2.at("false_alarms").is_null());
  CHECK(doc2.at("auc").is_null());
  CHECK_FALSE(doc2.at("pdc").is_null());
}
