#include <doctest.h>
#include <json.hpp>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "airlfd/ioutil.hpp"
#include "airlfd/pipeline.hpp"
#include "airlfd/runconfig.hpp"
#include "airlfd/signalio.hpp"
#include "test_util.hpp"

using namespace airlfd;
using namespace airlfd::pipeline;
using testutil::TempDir;
using testutil::thrown_code;
using testutil::thrown_message;
using testutil::write_text;

namespace fs = std::filesystem;

namespace {

// Small enough to train in seconds, large enough that every stage has data.
RunConfig tiny_cfg(const std::string& out_dir, const std::string& regime = "impulse-ramp",
                   std::uint64_t seed = 3) {
  RunConfig cfg;
  cfg.n_files = 10;
  cfg.samples_per_file = 1024;
  cfg.onset_file = 5;
  cfg.regime = regime;
  cfg.win_len = 128;
  cfg.stride = 128;
  cfg.mode = "decimate(8)";
  cfg.total_steps = 40;
  cfg.batch_size = 16;
  cfg.policy_hidden = {8};
  cfg.reward_hidden = {8};
  cfg.value_hidden = {8};
  cfg.iforest_psi = 16;
  cfg.iforest_trees = 20;
  cfg.ae_steps = 60;
  cfg.ae_batch_size = 16;
  cfg.ae_hidden = 8;
  cfg.ae_latent = 4;
  cfg.static_steps = 60;
  cfg.static_batch_size = 16;
  cfg.static_hidden = 8;
  cfg.static_noise_dim = 4;
  cfg.healthy_val_frac = 0.4;
  cfg.seed = seed;
  cfg.out_dir = out_dir;
  return cfg;
}

struct CmdResult {
  int exit_code = -1;
  std::string output;
};

CmdResult run_cli(const std::string& args, const TempDir& scratch) {
  const std::string out_path = scratch.file("cmd_out.txt");
  const std::string cmd = std::string(AIRLFD_CLI_PATH) + " " + args + " >'" + out_path + "' 2>&1";
  const int status = std::system(cmd.c_str());
  CmdResult result;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.output = testutil::read_text(out_path);
  return result;
}

}  // namespace

TEST_CASE("parse_config with no sources yields the documented defaults") {
  const RunConfig cfg = parse_config("", {}, false);
  CHECK(cfg.gamma == 0.9);
  CHECK(cfg.win_len == 256);
  CHECK(cfg.stride == 256);
  CHECK(cfg.mode == "decimate(4)");
  CHECK(cfg.persistence == 3);
  CHECK(cfg.sigma_k == 3.0);
  CHECK(cfg.threshold_method == "sigma_rule");
  CHECK(cfg.n_files == 60);
  CHECK(cfg.samples_per_file == 8192);
  CHECK(cfg.onset_file == 30);
  CHECK(cfg.total_steps == 5000);
  CHECK(cfg.batch_size == 128);
  CHECK(cfg.healthy_val_frac == 0.2);
  CHECK(cfg.model == "airl");
  CHECK(cfg.seed == 1);
  CHECK(cfg.logit_clamp == 40.0);
  CHECK(cfg.reward_hidden == std::vector<int>{64, 64});
}

TEST_CASE("config files reject unknown keys and wrong types by name") {
  TempDir dir("cfg");
  write_text(dir.file("bad_key.json"), R"({"gamm": 0.9})");
  CHECK(thrown_code([&] { parse_config(dir.file("bad_key.json"), {}, false); }) ==
        ErrorCode::UnknownKey);
  CHECK(thrown_message([&] { parse_config(dir.file("bad_key.json"), {}, false); })
            .find("gamm") != std::string::npos);

  write_text(dir.file("bad_type.json"), R"({"gamma": "high"})");
  const std::string msg =
      thrown_message([&] { parse_config(dir.file("bad_type.json"), {}, false); });
  CHECK(thrown_code([&] { parse_config(dir.file("bad_type.json"), {}, false); }) ==
        ErrorCode::TypeError);
  CHECK(msg.find("gamma") != std::string::npos);
  CHECK(msg.find("real") != std::string::npos);

  write_text(dir.file("not_object.json"), "[1,2]");
  CHECK(thrown_code([&] { parse_config(dir.file("not_object.json"), {}, false); }) ==
        ErrorCode::BadFormat);
  write_text(dir.file("garbage.json"), "{nope");
  CHECK(thrown_code([&] { parse_config(dir.file("garbage.json"), {}, false); }) ==
        ErrorCode::ParseError);
  CHECK(thrown_code([&] { parse_config(dir.file("absent.json"), {}, false); }) ==
        ErrorCode::MissingFile);
}

TEST_CASE("flags override environment, environment overrides the file") {
  TempDir dir("cfg");
  write_text(dir.file("cfg.json"), R"({"gamma": 0.8, "win_len": 512})");

  CHECK(parse_config(dir.file("cfg.json"), {}, false).gamma == 0.8);

  ::setenv("AIRLFD_GAMMA", "0.7", 1);
  CHECK(parse_config(dir.file("cfg.json"), {}, true).gamma == 0.7);
  CHECK(parse_config(dir.file("cfg.json"), {{"gamma", "0.5"}}, true).gamma == 0.5);
  ::unsetenv("AIRLFD_GAMMA");

  // file value survives where nothing overrides it
  CHECK(parse_config(dir.file("cfg.json"), {{"gamma", "0.5"}}, true).win_len == 512);

  ::setenv("AIRLFD_WIN_LEN", "not-a-number", 1);
  CHECK(thrown_code([&] { parse_config("", {}, true); }) == ErrorCode::TypeError);
  ::unsetenv("AIRLFD_WIN_LEN");
}

TEST_CASE("override strings parse per key type") {
  const RunConfig cfg = parse_config(
      "", {{"policy_hidden", "64,32"}, {"seed", "9"}, {"model", "iforest"}, {"onset_file", "-1"}},
      false);
  CHECK(cfg.policy_hidden == std::vector<int>{64, 32});
  CHECK(cfg.seed == 9);
  CHECK(cfg.model == "iforest");
  CHECK(cfg.onset_file == -1);

  CHECK(thrown_code([] { parse_config("", {{"gamm", "0.5"}}, false); }) == ErrorCode::UnknownKey);
  CHECK(thrown_code([] { parse_config("", {{"seed", "-2"}}, false); }) == ErrorCode::TypeError);
  CHECK(thrown_code([] { parse_config("", {{"batch_size", "16.5"}}, false); }) ==
        ErrorCode::TypeError);
}

TEST_CASE("parse_config validates cross-field constraints") {
  CHECK(thrown_code([] { parse_config("", {{"model", "foo"}}, false); }) == ErrorCode::BadConfig);
  CHECK(thrown_code([] { parse_config("", {{"threshold_method", "foo"}}, false); }) ==
        ErrorCode::BadConfig);
  CHECK(thrown_code([] { parse_config("", {{"regime", "foo"}}, false); }) == ErrorCode::BadConfig);
  CHECK(thrown_code([] { parse_config("", {{"mode", "fourier"}}, false); }) == ErrorCode::BadMode);
  CHECK(thrown_code([] { parse_config("", {{"healthy_val_frac", "0"}}, false); }) ==
        ErrorCode::BadConfig);
  CHECK(thrown_code([] { parse_config("", {{"out_dir", ""}}, false); }) == ErrorCode::BadConfig);
}

TEST_CASE("the digest pins the full canonical config") {
  const RunConfig a = parse_config("", {}, false);
  const RunConfig b = parse_config("", {}, false);
  CHECK(a.digest() == b.digest());
  CHECK(a.digest().size() == 16);

  const RunConfig c = parse_config("", {{"gamma", "0.5"}}, false);
  CHECK(a.digest() != c.digest());
}

TEST_CASE("output paths derive from out_dir, model, and explicit overrides") {
  RunConfig cfg = parse_config("", {{"out_dir", "run1"}}, false);
  CHECK(cfg.manifest_file() == "run1/manifest.json");
  CHECK(cfg.model_file() == "run1/model.json");
  CHECK(cfg.scores_file() == "run1/scores_airl.csv");
  CHECK(cfg.detect_file() == "run1/detect_airl.json");
  CHECK(cfg.report_file() == "run1/report_airl.json");
  CHECK(cfg.plot_file() == "run1/plot_airl.svg");

  cfg.model = "iforest";
  CHECK(cfg.scores_file() == "run1/scores_iforest.csv");

  cfg.manifest_path = "elsewhere/m.json";
  cfg.model_path = "elsewhere/model.json";
  CHECK(cfg.manifest_file() == "elsewhere/m.json");
  CHECK(cfg.model_file() == "elsewhere/model.json");
}

TEST_CASE("healthy_split holds out the last ceil(frac*H) healthy trajectories") {
  signalio::RunManifest manifest;
  manifest.healthy_lo = 0;
  manifest.healthy_hi = 29;
  const HealthySplit split = healthy_split(manifest, 0.2);
  CHECK(split.train_lo == 0);
  CHECK(split.train_hi == 23);
  CHECK(split.val_lo == 24);
  CHECK(split.val_hi == 29);

  manifest.healthy_hi = 1;
  const HealthySplit two = healthy_split(manifest, 0.5);
  CHECK(two.train_hi == 0);
  CHECK(two.val_lo == 1);
  CHECK(two.val_hi == 1);

  manifest.healthy_hi = 0;
  CHECK(thrown_code([&] { healthy_split(manifest, 0.2); }) == ErrorCode::InsufficientData);
}

TEST_CASE("scores CSV round-trips series, threshold, flags, and digest") {
  TempDir dir("scores");
  detector::ScoreSeries series;
  series.push_back({0, 31, 0.12345678901234567});
  series.push_back({1, 31, 1.0 / 3.0});
  series.push_back({2, 30, 0.75});
  const double threshold = 0.5;
  write_scores_csv(dir.file("s.csv"), series, threshold, "deadbeef00000000");

  const ScoresDoc doc = read_scores_csv(dir.file("s.csv"));
  CHECK(doc.digest == "deadbeef00000000");
  CHECK(doc.threshold == threshold);
  REQUIRE(doc.series.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(doc.series[i].trajectory_id == series[i].trajectory_id);
    CHECK(doc.series[i].n_transitions == series[i].n_transitions);
    CHECK(doc.series[i].score == series[i].score);  // shortest-round-trip format is exact
  }
  CHECK(doc.flags == std::vector<int>{0, 0, 1});

  CHECK(thrown_code([&] { read_scores_csv(dir.file("absent.csv")); }) == ErrorCode::MissingFile);
  write_text(dir.file("bad.csv"), "id,score\n0,0.5\n");
  CHECK(thrown_code([&] { read_scores_csv(dir.file("bad.csv")); }) == ErrorCode::BadFormat);
  write_text(dir.file("empty.csv"), "# config_digest=x\n");
  CHECK(thrown_code([&] { read_scores_csv(dir.file("empty.csv")); }) == ErrorCode::EmptyInput);
}

TEST_CASE("gradcheck rows cover every network and sit far under the gate") {
  const RunConfig cfg = parse_config("", {}, false);
  const auto rows = run_gradcheck(cfg);
  REQUIRE(rows.size() == 5);
  std::vector<std::string> names;
  for (const auto& row : rows) {
    names.push_back(row.name);
    INFO(row.name << " max_rel_err=" << row.max_rel_err);
    CHECK(row.max_rel_err <= 1e-4);
  }
  CHECK(names == std::vector<std::string>{"reward", "value", "policy_mean", "ae", "static_disc"});
}

TEST_CASE("full airl pipeline runs end to end on a tiny impulse-ramp dataset") {
  TempDir dir("e2e");
  const RunConfig cfg = tiny_cfg(dir.file("out"));

  run_synth(cfg);
  CHECK(fs::exists(cfg.manifest_file()));
  const signalio::RunManifest manifest = signalio::load_manifest(cfg.manifest_file());
  CHECK(manifest.files.size() == 10);
  CHECK(manifest.onset_true == 5);
  CHECK(manifest.healthy_hi == 4);
  CHECK(manifest.config_digest == cfg.digest());

  run_train(cfg);
  CHECK(fs::exists(cfg.model_file()));

  run_score(cfg);
  const ScoresDoc scores = read_scores_csv(cfg.scores_file());
  CHECK(scores.digest == cfg.digest());
  CHECK(scores.series.size() == 10);
  for (const auto& ts : scores.series) CHECK(ts.n_transitions == 7);

  run_detect(cfg);
  const nlohmann::json detect = nlohmann::json::parse(testutil::read_text(cfg.detect_file()));
  CHECK(detect.at("config_digest").get<std::string>() == cfg.digest());
  CHECK(detect.at("model").get<std::string>() == "airl");
  CHECK(detect.at("method").get<std::string>() == "sigma_rule");
  CHECK(detect.at("threshold").get<double>() == scores.threshold);
  CHECK(detect.contains("onset"));

  run_eval(cfg);
  const nlohmann::json report = nlohmann::json::parse(testutil::read_text(cfg.report_file()));
  CHECK(report.at("onset_true").get<int>() == 5);
  CHECK(report.at("model").get<std::string>() == "airl");
  CHECK(report.at("config_digest").get<std::string>() == cfg.digest());
  CHECK_FALSE(report.at("auc").is_null());
  CHECK_FALSE(report.at("false_alarms").is_null());

  run_plot(cfg);
  const std::string svg = testutil::read_text(cfg.plot_file());
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("config_digest=" + cfg.digest()) != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("true=5") != std::string::npos);

  // identical config reruns reproduce every artifact byte for byte
  const std::string synth_bytes = testutil::read_text(dir.file("out/file_003.csv"));
  const std::string scores_bytes = testutil::read_text(cfg.scores_file());
  const std::string report_bytes = testutil::read_text(cfg.report_file());
  const std::string plot_bytes = testutil::read_text(cfg.plot_file());
  run_synth(cfg);
  run_score(cfg);
  run_eval(cfg);
  run_plot(cfg);
  CHECK(testutil::read_text(dir.file("out/file_003.csv")) == synth_bytes);
  CHECK(testutil::read_text(cfg.scores_file()) == scores_bytes);
  CHECK(testutil::read_text(cfg.report_file()) == report_bytes);
  CHECK(testutil::read_text(cfg.plot_file()) == plot_bytes);
}

TEST_CASE("baseline command scores with each non-airl model") {
  TempDir dir("base");
  RunConfig cfg = tiny_cfg(dir.file("out"), "impulse-ramp", 5);
  run_synth(cfg);

  for (const std::string model : {"iforest", "ae", "static"}) {
    cfg.model = model;
    run_baseline(cfg);
    const ScoresDoc doc = read_scores_csv(cfg.scores_file());
    CHECK(doc.series.size() == 10);
    CHECK(doc.digest == cfg.digest());
    run_detect(cfg);
    CHECK(fs::exists(dir.file("out/detect_" + model + ".json")));
  }

  cfg.model = "airl";
  CHECK(thrown_code([&] { run_baseline(cfg); }) == ErrorCode::BadConfig);
  cfg.model = "iforest";
  CHECK(thrown_code([&] { run_score(cfg); }) == ErrorCode::BadConfig);
}

TEST_CASE("failed train leaves no model file behind") {
  TempDir dir("fail");
  RunConfig cfg = tiny_cfg(dir.file("out"));
  CHECK(thrown_code([&] { run_train(cfg); }) == ErrorCode::MissingFile);  // no manifest yet
  CHECK_FALSE(fs::exists(cfg.model_file()));
}

TEST_CASE("cli binary: detect before score exits 2 and names the missing file") {
  TempDir dir("proc");
  const CmdResult r = run_cli("detect --out-dir '" + dir.file("out") + "'", dir);
  INFO(r.output);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("scores_airl.csv") != std::string::npos);
}

TEST_CASE("cli binary: usage errors exit 1") {
  TempDir dir("proc");
  CHECK(run_cli("synth --bogus 1", dir).exit_code == 1);
  CHECK(run_cli("frobnicate", dir).exit_code == 1);
  CHECK(run_cli("", dir).exit_code == 1);  // missing subcommand
  const CmdResult unknown_key =
      run_cli("synth --out-dir '" + dir.file("out") + "' --model nope", dir);
  INFO(unknown_key.output);
  CHECK(unknown_key.exit_code == 1);
}

TEST_CASE("cli binary: help exits 0") {
  TempDir dir("proc");
  const CmdResult r = run_cli("--help", dir);
  INFO(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("synth") != std::string::npos);
}

TEST_CASE("cli binary: gradcheck exits 0 and reports every network ok") {
  TempDir dir("proc");
  const CmdResult r = run_cli("gradcheck --seed 2", dir);
  INFO(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("reward") != std::string::npos);
  CHECK(r.output.find("static_disc") != std::string::npos);
  CHECK(r.output.find("FAIL") == std::string::npos);
}

TEST_CASE("cli binary: synth with flags exits 0 and writes the dataset") {
  TempDir dir("proc");
  const CmdResult r = run_cli("synth --out-dir '" + dir.file("out") +
                                  "' --n-files 3 --samples-per-file 600 --onset-file -1 "
                                  "--regime healthy-only",
                              dir);
  INFO(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("wrote") != std::string::npos);
  CHECK(fs::exists(dir.file("out/manifest.json")));
  CHECK(fs::exists(dir.file("out/file_002.csv")));

  const CmdResult bad = run_cli("synth --out-dir '" + dir.file("out2") + "' --ar-radius 1.5", dir);
  INFO(bad.output);
  CHECK(bad.exit_code == 1);
}
