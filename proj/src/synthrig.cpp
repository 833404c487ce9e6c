#include "airlfd/synthrig.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "airlfd/ioutil.hpp"
#include "airlfd/rng.hpp"

namespace airlfd::synthrig {

namespace {

constexpr int kBurnIn = 500;
constexpr int kBurstLen = 32;
constexpr double kBurstFreq = 0.35;   // cycles per sample
constexpr double kBurstDecay = 0.2;   // per sample
constexpr int kBurstPeriod = 512;
constexpr double kBurstBaseAmp = 0.2;
constexpr double kBurstGrowth = 1.15;
constexpr double kBurstAmpCap = 5.0;
constexpr int kResetChunk = 256;

// AR(2) with poles at rho*exp(+-i*theta0), unit-variance Gaussian drive,
// started from rest with kBurnIn discarded samples.
Eigen::VectorXd ar2_segment(SplitMix64& rng, double rho, double theta0, int n) {
  const double a1 = 2.0 * rho * std::cos(theta0);
  const double a2 = -rho * rho;
  double x1 = 0.0, x2 = 0.0;
  for (int t = 0; t < kBurnIn; ++t) {
    const double x = a1 * x1 + a2 * x2 + rng.gaussian();
    x2 = x1;
    x1 = x;
  }
  Eigen::VectorXd out(n);
  for (int t = 0; t < n; ++t) {
    const double x = a1 * x1 + a2 * x2 + rng.gaussian();
    out(t) = x;
    x2 = x1;
    x1 = x;
  }
  return out;
}

void rescale_unit_rms(Eigen::VectorXd& x) {
  const double rms = std::sqrt(x.array().square().mean());
  if (rms > 0.0) x /= rms;
}

void add_noise(Eigen::VectorXd& x, SplitMix64& rng, double noise_std) {
  for (long t = 0; t < x.size(); ++t) x(t) += noise_std * rng.gaussian();
}

void add_bursts(Eigen::VectorXd& x, double amp) {
  for (long start = 0; start < x.size(); start += kBurstPeriod) {
    for (int n = 0; n < kBurstLen && start + n < x.size(); ++n) {
      x(start + n) += amp * std::exp(-kBurstDecay * n) *
                      std::sin(2.0 * M_PI * kBurstFreq * n);
    }
  }
}

void check_config(const SynthConfig& cfg) {
  if (cfg.n_files < 1) fail(ErrorCode::BadConfig, "n_files must be >= 1");
  if (cfg.samples_per_file < 1) fail(ErrorCode::BadConfig, "samples_per_file must be >= 1");
  if (!(cfg.ar_radius > 0.0 && cfg.ar_radius < 1.0))
    fail(ErrorCode::BadConfig, "ar_radius must be in (0,1)");
  if (cfg.noise_std < 0.0) fail(ErrorCode::BadConfig, "noise_std must be >= 0");
  if (cfg.has_onset() && cfg.onset_file >= cfg.n_files)
    fail(ErrorCode::BadConfig, "onset_file must be < n_files");
}

}  // namespace

Regime parse_regime(const std::string& text) {
  if (text == "healthy-only") return Regime::HealthyOnly;
  if (text == "impulse-ramp") return Regime::ImpulseRamp;
  if (text == "boundary-reset") return Regime::BoundaryReset;
  fail(ErrorCode::BadConfig, "unknown regime '" + text + "'");
}

const char* regime_str(Regime regime) {
  switch (regime) {
    case Regime::HealthyOnly: return "healthy-only";
    case Regime::ImpulseRamp: return "impulse-ramp";
    case Regime::BoundaryReset: return "boundary-reset";
  }
  return "?";
}

SynthRun gen_run(const SynthConfig& cfg) {
  check_config(cfg);
  const bool faulty = cfg.regime != Regime::HealthyOnly && cfg.has_onset();

  SynthRun run;
  run.recordings.reserve(static_cast<std::size_t>(cfg.n_files));
  for (int i = 0; i < cfg.n_files; ++i) {
    SplitMix64 rng = substream(cfg.seed, static_cast<std::uint64_t>(i));
    const bool post = faulty && i >= cfg.onset_file;

    Eigen::VectorXd x;
    if (post && cfg.regime == Regime::BoundaryReset) {
      // Every kResetChunk-sample stretch is an independent fresh-burn-in run:
      // window marginals match healthy, cross-window continuity does not.
      x.resize(cfg.samples_per_file);
      for (int start = 0; start < cfg.samples_per_file; start += kResetChunk) {
        const int len = std::min(kResetChunk, cfg.samples_per_file - start);
        x.segment(start, len) = ar2_segment(rng, cfg.ar_radius, cfg.ar_angle, len);
      }
    } else {
      x = ar2_segment(rng, cfg.ar_radius, cfg.ar_angle, cfg.samples_per_file);
    }
    rescale_unit_rms(x);
    if (post && cfg.regime == Regime::ImpulseRamp) {
      const double amp = std::min(
          kBurstBaseAmp * std::pow(kBurstGrowth, static_cast<double>(i - cfg.onset_file)),
          kBurstAmpCap);
      add_bursts(x, amp);
    }
    add_noise(x, rng, cfg.noise_std);

    signalio::Recording rec;
    rec.trajectory_id = i;
    rec.channel_id = 0;
    rec.samples = std::move(x);
    run.recordings.push_back(std::move(rec));
  }

  run.manifest.channel = 0;
  run.manifest.onset_true = faulty ? cfg.onset_file : -1;
  run.manifest.healthy_lo = 0;
  run.manifest.healthy_hi = faulty ? cfg.onset_file - 1 : cfg.n_files - 1;
  return run;
}

signalio::RunManifest write_run(const SynthRun& run, const std::string& out_dir,
                                const std::string& config_digest) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create directory " + out_dir + ": " + ec.message());

  signalio::RunManifest manifest = run.manifest;
  manifest.config_digest = config_digest;
  manifest.files.clear();
  for (const auto& rec : run.recordings) {
    char name[32];
    std::snprintf(name, sizeof name, "file_%03d.csv", rec.trajectory_id);
    std::string body;
    body.reserve(static_cast<std::size_t>(rec.samples.size()) * 20);
    for (long t = 0; t < rec.samples.size(); ++t) {
      body += format_double(rec.samples(t));
      body += '\n';
    }
    write_file_atomic((fs::path(out_dir) / name).string(), body);
    manifest.files.emplace_back(name);
  }
  signalio::save_manifest(manifest, (fs::path(out_dir) / "manifest.json").string());
  return manifest;
}

}  // namespace airlfd::synthrig
