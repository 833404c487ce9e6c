#include "airlfd/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string_view>

#include "airlfd/airlcore.hpp"
#include "airlfd/baselines.hpp"
#include "airlfd/evalkit.hpp"
#include "airlfd/ioutil.hpp"
#include "airlfd/synthrig.hpp"

namespace airlfd::pipeline {

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr const char* kScoresHeader = "trajectory_id,n_transitions,score,threshold,flag";

signalio::FeatureConfig feature_config(const RunConfig& cfg) {
  signalio::FeatureConfig fc;
  fc.win_len = cfg.win_len;
  fc.stride = cfg.stride;
  fc.mode = signalio::FeatureMode::parse(cfg.mode);
  return fc;
}

std::vector<signalio::Recording> load_recordings(const std::string& manifest_path,
                                                 const signalio::RunManifest& manifest, int id_lo,
                                                 int id_hi) {
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<signalio::Recording> out;
  out.reserve(static_cast<std::size_t>(id_hi - id_lo + 1));
  for (int id = id_lo; id <= id_hi; ++id) {
    const fs::path file = dir / manifest.files[static_cast<std::size_t>(id)];
    out.push_back(signalio::load_recording(file.string(), manifest.channel, id));
  }
  return out;
}

std::vector<signalio::WindowedTrajectory> window_all(
    const std::vector<signalio::Recording>& recordings, const signalio::Normalizer& norm,
    const signalio::FeatureConfig& fc) {
  std::vector<signalio::WindowedTrajectory> out;
  out.reserve(recordings.size());
  for (const auto& rec : recordings) {
    signalio::WindowedTrajectory traj;
    traj.trajectory_id = rec.trajectory_id;
    traj.windows = signalio::normalize_and_window(rec, norm, fc);
    out.push_back(std::move(traj));
  }
  return out;
}

detector::ThresholdSpec compute_threshold(const RunConfig& cfg,
                                          const detector::ScoreSeries& series,
                                          const signalio::RunManifest& manifest) {
  const auto method = detector::parse_threshold_method(cfg.threshold_method);
  if (method == detector::ThresholdMethod::SigmaRule) {
    const HealthySplit split = healthy_split(manifest, cfg.healthy_val_frac);
    std::vector<double> val_scores;
    for (const auto& ts : series)
      if (ts.trajectory_id >= split.val_lo && ts.trajectory_id <= split.val_hi)
        val_scores.push_back(ts.score);
    return detector::sigma_threshold(val_scores, cfg.sigma_k);
  }
  std::vector<double> scores;
  scores.reserve(series.size());
  for (const auto& ts : series) scores.push_back(ts.score);
  return method == detector::ThresholdMethod::Otsu ? detector::otsu_threshold(scores)
                                                   : detector::kmeans2_threshold(scores);
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create directory " + cfg.out_dir + ": " + ec.message());
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

detector::OnsetDecision decide_from_doc(const RunConfig& cfg, const ScoresDoc& doc) {
  detector::ThresholdSpec spec;
  spec.method = detector::parse_threshold_method(cfg.threshold_method);
  spec.value = doc.threshold;
  spec.k = cfg.sigma_k;
  return detector::detect_onset(doc.series, spec, cfg.persistence);
}

std::optional<int> manifest_onset(const signalio::RunManifest& manifest) {
  if (manifest.has_onset()) return manifest.onset_true;
  return std::nullopt;
}

// Baseline window scorer dispatch, fitted on the healthy-train windows only.
std::vector<double> fit_and_score_baseline(const RunConfig& cfg,
                                           const std::vector<signalio::FeatureVec>& train,
                                           const std::vector<signalio::FeatureVec>& all) {
  std::vector<double> scores;
  scores.reserve(all.size());
  if (cfg.model == "iforest") {
    const baselines::IsoForest forest =
        baselines::iforest_fit(train, cfg.iforest_psi, cfg.iforest_trees, cfg.seed);
    for (const auto& w : all) scores.push_back(baselines::iforest_score(forest, w));
  } else if (cfg.model == "ae") {
    baselines::AeConfig ae_cfg;
    ae_cfg.steps = cfg.ae_steps;
    ae_cfg.batch_size = cfg.ae_batch_size;
    ae_cfg.hidden = cfg.ae_hidden;
    ae_cfg.latent = cfg.ae_latent;
    ae_cfg.seed = cfg.seed;
    const baselines::WindowAE ae = baselines::ae_fit(train, ae_cfg);
    for (const auto& w : all) scores.push_back(baselines::ae_score(ae, w));
  } else if (cfg.model == "static") {
    baselines::StaticConfig st_cfg;
    st_cfg.steps = cfg.static_steps;
    st_cfg.batch_size = cfg.static_batch_size;
    st_cfg.hidden = cfg.static_hidden;
    st_cfg.noise_dim = cfg.static_noise_dim;
    st_cfg.logit_clamp = cfg.logit_clamp;
    st_cfg.seed = cfg.seed;
    const baselines::StaticDisc sd = baselines::static_fit(train, st_cfg);
    for (const auto& w : all) scores.push_back(baselines::static_score(sd, w));
  } else {
    fail(ErrorCode::BadConfig, "baseline requires model in {iforest, ae, static}");
  }
  return scores;
}

}  // namespace

HealthySplit healthy_split(const signalio::RunManifest& manifest, double val_frac) {
  if (!(val_frac > 0.0 && val_frac < 1.0))
    fail(ErrorCode::BadConfig, "healthy_val_frac must be in (0,1)");
  const int h = manifest.healthy_hi - manifest.healthy_lo + 1;
  const int n_val = std::max(1, static_cast<int>(std::ceil(val_frac * h)));
  if (h - n_val < 1)
    fail(ErrorCode::InsufficientData,
         "only " + std::to_string(h) + " healthy trajectories; cannot hold out validation");
  HealthySplit split;
  split.train_lo = manifest.healthy_lo;
  split.train_hi = manifest.healthy_hi - n_val;
  split.val_lo = manifest.healthy_hi - n_val + 1;
  split.val_hi = manifest.healthy_hi;
  return split;
}

void write_scores_csv(const std::string& path, const detector::ScoreSeries& series,
                      double threshold, const std::string& digest) {
  std::string body = "# config_digest=" + digest + "\n";
  body += kScoresHeader;
  body += '\n';
  for (const auto& ts : series) {
    body += std::to_string(ts.trajectory_id);
    body += ',';
    body += std::to_string(ts.n_transitions);
    body += ',';
    body += format_double(ts.score);
    body += ',';
    body += format_double(threshold);
    body += ',';
    body += (ts.score >= threshold) ? '1' : '0';
    body += '\n';
  }
  write_file_atomic(path, body);
}

ScoresDoc read_scores_csv(const std::string& path) {
  const std::string text = read_file_text(path);
  ScoresDoc doc;
  std::size_t pos = 0;
  int line_no = 0;
  bool saw_header = false;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return true;
  };
  std::string_view line;
  while (next_line(line)) {
    if (line.empty()) continue;
    if (line.starts_with("# config_digest=")) {
      doc.digest = std::string(line.substr(16));
      continue;
    }
    if (!saw_header) {
      if (line != kScoresHeader)
        fail(ErrorCode::BadFormat, path + ":" + std::to_string(line_no) + ": expected header '" +
                                       kScoresHeader + "'");
      saw_header = true;
      continue;
    }
    detector::TrajectoryScore ts;
    int flag = 0;
    double threshold = 0.0;
    const int n = std::sscanf(std::string(line).c_str(), "%d,%d,%lf,%lf,%d", &ts.trajectory_id,
                              &ts.n_transitions, &ts.score, &threshold, &flag);
    if (n != 5)
      fail(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": bad scores row");
    if (!doc.series.empty() && threshold != doc.threshold)
      fail(ErrorCode::BadFormat, path + ":" + std::to_string(line_no) + ": threshold differs");
    doc.threshold = threshold;
    doc.series.push_back(ts);
    doc.flags.push_back(flag);
  }
  if (!saw_header || doc.series.empty()) fail(ErrorCode::EmptyInput, path + ": no score rows");
  return doc;
}

void run_synth(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  synthrig::SynthConfig sc;
  sc.n_files = cfg.n_files;
  sc.samples_per_file = cfg.samples_per_file;
  sc.onset_file = cfg.onset_file;
  sc.regime = synthrig::parse_regime(cfg.regime);
  sc.ar_radius = cfg.ar_radius;
  sc.ar_angle = cfg.ar_angle;
  sc.noise_std = cfg.noise_std;
  sc.seed = cfg.seed;
  const synthrig::SynthRun run = synthrig::gen_run(sc);
  try {
    synthrig::write_run(run, cfg.out_dir, cfg.digest());
  } catch (...) {
    // Remove whatever this invocation managed to write.
    std::error_code ec;
    for (int i = 0; i < sc.n_files; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "file_%03d.csv", i);
      fs::remove(fs::path(cfg.out_dir) / name, ec);
      fs::remove(fs::path(cfg.out_dir) / (std::string(name) + ".tmp"), ec);
    }
    fs::remove(fs::path(cfg.out_dir) / "manifest.json", ec);
    fs::remove(fs::path(cfg.out_dir) / "manifest.json.tmp", ec);
    throw;
  }
}

void run_train(const RunConfig& cfg) {
  const std::string manifest_path = cfg.manifest_file();
  const signalio::RunManifest manifest = signalio::load_manifest(manifest_path);
  const HealthySplit split = healthy_split(manifest, cfg.healthy_val_frac);

  const auto train_recs = load_recordings(manifest_path, manifest, split.train_lo, split.train_hi);
  const signalio::Normalizer norm = signalio::fit_normalizer(train_recs);
  const signalio::FeatureConfig fc = feature_config(cfg);
  const signalio::TransitionSet expert =
      signalio::build_transitions(window_all(train_recs, norm, fc));

  airlcore::TrainConfig tc;
  tc.total_steps = cfg.total_steps;
  tc.batch_size = cfg.batch_size;
  tc.disc_steps_per_round = cfg.disc_steps_per_round;
  tc.gen_steps_per_round = cfg.gen_steps_per_round;
  tc.gamma = cfg.gamma;
  tc.lr_disc = cfg.lr_disc;
  tc.lr_policy = cfg.lr_policy;
  tc.logit_clamp = cfg.logit_clamp;
  tc.log_std_init = cfg.log_std_init;
  tc.policy_hidden = cfg.policy_hidden;
  tc.reward_hidden = cfg.reward_hidden;
  tc.value_hidden = cfg.value_hidden;
  tc.seed = cfg.seed;

  const airlcore::AirlModel model = airlcore::train_airl(expert, tc, norm, fc);
  const fs::path parent = fs::path(cfg.model_file()).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
  }
  airlcore::save_model(model, cfg.model_file(), cfg.digest());
}

void run_score(const RunConfig& cfg) {
  if (cfg.model != "airl")
    fail(ErrorCode::BadConfig, "score requires model=airl (use the baseline command instead)");
  ensure_out_dir(cfg);
  const airlcore::AirlModel model = airlcore::load_model(cfg.model_file());
  const std::string manifest_path = cfg.manifest_file();
  const signalio::RunManifest manifest = signalio::load_manifest(manifest_path);

  const auto recs =
      load_recordings(manifest_path, manifest, 0, static_cast<int>(manifest.files.size()) - 1);
  const signalio::TransitionSet all =
      signalio::build_transitions(window_all(recs, model.normalizer, model.feature));
  const detector::ScoreSeries series = detector::score_series(model, all, cfg.logit_clamp);
  const detector::ThresholdSpec threshold = compute_threshold(cfg, series, manifest);
  write_scores_csv(cfg.scores_file(), series, threshold.value, cfg.digest());
}

void run_baseline(const RunConfig& cfg) {
  ensure_out_dir(cfg);
  const std::string manifest_path = cfg.manifest_file();
  const signalio::RunManifest manifest = signalio::load_manifest(manifest_path);
  const HealthySplit split = healthy_split(manifest, cfg.healthy_val_frac);

  const auto recs =
      load_recordings(manifest_path, manifest, 0, static_cast<int>(manifest.files.size()) - 1);
  std::vector<signalio::Recording> train_recs(
      recs.begin() + split.train_lo, recs.begin() + split.train_hi + 1);
  const signalio::Normalizer norm = signalio::fit_normalizer(train_recs);
  const signalio::FeatureConfig fc = feature_config(cfg);
  const auto trajectories = window_all(recs, norm, fc);

  std::vector<signalio::FeatureVec> train_windows, all_windows;
  for (const auto& traj : trajectories) {
    for (const auto& w : traj.windows) {
      all_windows.push_back(w);
      if (traj.trajectory_id >= split.train_lo && traj.trajectory_id <= split.train_hi)
        train_windows.push_back(w);
    }
  }

  const std::vector<double> window_scores = fit_and_score_baseline(cfg, train_windows, all_windows);

  detector::ScoreSeries series;
  std::size_t cursor = 0;
  for (const auto& traj : trajectories) {
    double sum = 0.0;
    for (std::size_t k = 0; k < traj.windows.size(); ++k) sum += window_scores[cursor++];
    detector::TrajectoryScore ts;
    ts.trajectory_id = traj.trajectory_id;
    ts.n_transitions = static_cast<int>(traj.windows.size());
    ts.score = sum / static_cast<double>(traj.windows.size());
    series.push_back(ts);
  }

  const detector::ThresholdSpec threshold = compute_threshold(cfg, series, manifest);
  write_scores_csv(cfg.scores_file(), series, threshold.value, cfg.digest());
}

void run_detect(const RunConfig& cfg) {
  const ScoresDoc doc = read_scores_csv(cfg.scores_file());
  const detector::OnsetDecision decision = decide_from_doc(cfg, doc);
  nlohmann::json out;
  out["config_digest"] = cfg.digest();
  out["model"] = cfg.model;
  out["method"] = cfg.threshold_method;
  out["threshold"] = decision.threshold.value;
  out["persistence"] = decision.persistence;
  out["onset"] = decision.has_onset() ? nlohmann::json(decision.onset) : nlohmann::json(nullptr);
  ensure_out_dir(cfg);
  write_json_file(cfg.detect_file(), out);
}

void run_eval(const RunConfig& cfg) {
  const ScoresDoc doc = read_scores_csv(cfg.scores_file());
  const signalio::RunManifest manifest = signalio::load_manifest(cfg.manifest_file());
  const detector::OnsetDecision decision = decide_from_doc(cfg, doc);
  const evalkit::DetectionReport report =
      evalkit::evaluate_run(doc.series, decision, manifest_onset(manifest));
  ensure_out_dir(cfg);
  write_file_atomic(cfg.report_file(), evalkit::report_json(report, cfg.model, cfg.digest()));
}

void run_plot(const RunConfig& cfg) {
  const ScoresDoc doc = read_scores_csv(cfg.scores_file());
  const detector::OnsetDecision decision = decide_from_doc(cfg, doc);
  std::optional<int> onset_true;
  if (fs::exists(cfg.manifest_file()))
    onset_true = manifest_onset(signalio::load_manifest(cfg.manifest_file()));

  const double left = 70, top = 30, width = 770, height = 380;
  double ymax = doc.threshold;
  int xmin = doc.series.front().trajectory_id, xmax = doc.series.back().trajectory_id;
  for (const auto& ts : doc.series) ymax = std::max(ymax, ts.score);
  ymax = ymax > 0 ? ymax * 1.05 : 1.0;
  if (xmax == xmin) ++xmax;

  auto px = [&](double t) { return left + (t - xmin) / (xmax - xmin) * width; };
  auto py = [&](double v) { return top + height - v / ymax * height; };
  char buf[256];
  std::string svg;
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    svg += buf;
  };

  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"860\" height=\"460\" "
         "viewBox=\"0 0 860 460\">\n";
  svg += "<desc>config_digest=" + cfg.digest() + "</desc>\n";
  svg += "<rect width=\"860\" height=\"460\" fill=\"white\"/>\n";
  add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
      "stroke=\"black\"/>\n",
      left, top, width, height);
  add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" font-family=\"monospace\">%s trajectory "
      "scores</text>\n",
      left, top - 10.0, cfg.model.c_str());
  // y ticks
  for (double frac : {0.0, 0.5, 1.0}) {
    const double v = ymax * frac;
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" font-family=\"monospace\" "
        "text-anchor=\"end\">%.4g</text>\n",
        left - 6.0, py(v) + 4.0, v);
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#cccccc\"/>\n", left,
        py(v), left + width, py(v));
  }
  // x ticks
  for (int t : {xmin, (xmin + xmax) / 2, xmax}) {
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" font-family=\"monospace\" "
        "text-anchor=\"middle\">%d</text>\n",
        px(t), top + height + 18.0, t);
  }
  add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" font-family=\"monospace\" "
      "text-anchor=\"middle\">trajectory</text>\n",
      left + width / 2, top + height + 40.0);
  // threshold line
  add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"red\" "
      "stroke-dasharray=\"6,4\"/>\n",
      left, py(doc.threshold), left + width, py(doc.threshold));
  add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" font-family=\"monospace\" "
      "fill=\"red\">threshold=%s</text>\n",
      left + 6.0, py(doc.threshold) - 5.0, format_double(doc.threshold).c_str());
  // onset markers
  if (onset_true) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\" "
        "stroke-dasharray=\"3,3\"/>\n",
        px(*onset_true), top, px(*onset_true), top + height);
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" font-family=\"monospace\" "
        "fill=\"gray\">true=%d</text>\n",
        px(*onset_true) + 4.0, top + 14.0, *onset_true);
  }
  if (decision.has_onset()) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"orange\"/>\n",
        px(decision.onset), top, px(decision.onset), top + height);
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" font-family=\"monospace\" "
        "fill=\"orange\">pred=%d</text>\n",
        px(decision.onset) + 4.0, top + 28.0, decision.onset);
  }
  // score polyline
  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < doc.series.size(); ++k) {
    if (k) svg += ' ';
    add("%.2f,%.2f", px(doc.series[k].trajectory_id), py(doc.series[k].score));
  }
  svg += "\"/>\n";
  svg += "</svg>\n";

  ensure_out_dir(cfg);
  write_file_atomic(cfg.plot_file(), svg);
}

std::vector<GradCheckRow> run_gradcheck(const RunConfig& cfg) {
  const int d = 6;
  const int b = 12;
  const std::uint64_t seed = cfg.seed;

  airlcore::AirlModel model;
  model.policy.mean_net =
      numcore::init_mlp(numcore::mlp_chain({d, 8, d}), substream(seed, 1).state_);
  model.policy.log_std = VectorXd::Constant(d, -0.5);
  model.disc.reward_net =
      numcore::init_mlp(numcore::mlp_chain({2 * d, 8, 1}), substream(seed, 2).state_);
  model.disc.value_net =
      numcore::init_mlp(numcore::mlp_chain({d, 8, 1}), substream(seed, 3).state_);
  model.disc.gamma = cfg.gamma;

  SplitMix64 rng = substream(seed, 10);
  auto draw = [&rng](int rows, int cols) {
    MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = rng.gaussian();
    return m;
  };

  airlcore::TransitionBatch expert{draw(d, b), draw(d, b), MatrixXd()};
  expert.s_next = expert.a;
  airlcore::TransitionBatch generated{draw(d, b), draw(d, b), MatrixXd()};
  generated.s_next = generated.a;

  std::vector<GradCheckRow> rows;

  {  // reward net through the discriminator BCE
    const airlcore::DiscGrads grads = airlcore::disc_loss_and_grads(model, expert, generated);
    const double err_r = numcore::grad_check(
        model.disc.reward_net, grads.reward, [&](const numcore::MlpParams& p) {
          airlcore::AirlModel probe = model;
          probe.disc.reward_net = p;
          return airlcore::disc_loss_and_grads(probe, expert, generated).loss;
        });
    rows.push_back({"reward", err_r});
    const double err_v = numcore::grad_check(
        model.disc.value_net, grads.value, [&](const numcore::MlpParams& p) {
          airlcore::AirlModel probe = model;
          probe.disc.value_net = p;
          return airlcore::disc_loss_and_grads(probe, expert, generated).loss;
        });
    rows.push_back({"value", err_v});
  }

  {  // policy mean net (and log_std) through the reparameterized objective
    const MatrixXd states = draw(d, b);
    const MatrixXd eps = draw(d, b);
    const airlcore::PolicyObjective po = airlcore::policy_objective(model, states, eps);
    double err = numcore::grad_check(
        model.policy.mean_net, po.mean_grads, [&](const numcore::MlpParams& p) {
          airlcore::AirlModel probe = model;
          probe.policy.mean_net = p;
          return airlcore::policy_objective(probe, states, eps).objective;
        });
    const double fd_eps = 1e-5;
    for (int j = 0; j < d; ++j) {
      airlcore::AirlModel probe = model;
      probe.policy.log_std(j) = model.policy.log_std(j) + fd_eps;
      const double hi = airlcore::policy_objective(probe, states, eps).objective;
      probe.policy.log_std(j) = model.policy.log_std(j) - fd_eps;
      const double lo = airlcore::policy_objective(probe, states, eps).objective;
      const double numeric = (hi - lo) / (2.0 * fd_eps);
      err = std::max(err, std::abs(po.log_std_grad(j) - numeric) /
                              std::max(1.0, std::abs(numeric)));
    }
    rows.push_back({"policy_mean", err});
  }

  {  // autoencoder reconstruction loss
    numcore::MlpParams encoder = numcore::init_mlp(
        {{d, 8, numcore::Activation::Tanh}, {8, 4, numcore::Activation::Tanh}},
        substream(seed, 4).state_);
    numcore::MlpParams decoder =
        numcore::init_mlp(numcore::mlp_chain({4, 8, d}), substream(seed, 5).state_);
    const MatrixXd x = draw(d, b);
    auto ae_loss = [&x](const numcore::MlpParams& enc, const numcore::MlpParams& dec) {
      const MatrixXd recon = numcore::forward(dec, numcore::forward(enc, x));
      return (recon - x).squaredNorm() / static_cast<double>(x.size());
    };
    numcore::ForwardCache enc_cache, dec_cache;
    const MatrixXd code = numcore::forward(encoder, x, &enc_cache);
    const MatrixXd recon = numcore::forward(decoder, code, &dec_cache);
    const MatrixXd dy = 2.0 * (recon - x) / static_cast<double>(x.size());
    auto [dec_grads, d_code] = numcore::backward(decoder, dec_cache, dy);
    auto [enc_grads, d_in] = numcore::backward(encoder, enc_cache, d_code);
    const double err_dec = numcore::grad_check(
        decoder, dec_grads, [&](const numcore::MlpParams& p) { return ae_loss(encoder, p); });
    const double err_enc = numcore::grad_check(
        encoder, enc_grads, [&](const numcore::MlpParams& p) { return ae_loss(p, decoder); });
    rows.push_back({"ae", std::max(err_enc, err_dec)});
  }

  {  // static discriminator BCE
    numcore::MlpParams disc =
        numcore::init_mlp(numcore::mlp_chain({d, 8, 1}), substream(seed, 6).state_);
    const MatrixXd real = draw(d, b);
    const MatrixXd fake = draw(d, b);
    auto bce = [&](const numcore::MlpParams& p, numcore::MlpGrads* grads_out) {
      MatrixXd x(d, 2 * b);
      x.leftCols(b) = real;
      x.rightCols(b) = fake;
      numcore::ForwardCache cache;
      const MatrixXd logits = numcore::forward(p, x, &cache);
      double loss = 0.0;
      MatrixXd g(1, 2 * b);
      for (int k = 0; k < 2 * b; ++k) {
        const double raw = logits(0, k);
        const double prob = airlcore::sigmoid(raw);
        loss += k < b ? airlcore::softplus(-raw) : airlcore::softplus(raw);
        g(0, k) = (k < b ? prob - 1.0 : prob) / static_cast<double>(2 * b);
      }
      if (grads_out) *grads_out = numcore::backward(p, cache, g).first;
      return loss / static_cast<double>(2 * b);
    };
    numcore::MlpGrads analytic;
    bce(disc, &analytic);
    const double err = numcore::grad_check(
        disc, analytic, [&](const numcore::MlpParams& p) { return bce(p, nullptr); });
    rows.push_back({"static_disc", err});
  }

  return rows;
}

}  // namespace airlfd::pipeline
