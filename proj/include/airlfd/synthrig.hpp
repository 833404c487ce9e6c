#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "airlfd/signalio.hpp"

namespace airlfd::synthrig {

enum class Regime { HealthyOnly, ImpulseRamp, BoundaryReset };

Regime parse_regime(const std::string& text);
const char* regime_str(Regime regime);

struct SynthConfig {
  int n_files = 60;
  int samples_per_file = 8192;
  int onset_file = 30;  // < 0 means none
  Regime regime = Regime::ImpulseRamp;
  double ar_radius = 0.95;            // pole radius rho
  double ar_angle = 0.62831853071795864769;  // 2*pi*0.1
  double noise_std = 0.05;
  std::uint64_t seed = 1;

  bool has_onset() const { return onset_file >= 0; }
};

struct SynthRun {
  std::vector<signalio::Recording> recordings;
  signalio::RunManifest manifest;  // files[] left empty until written to disk
};

// Deterministic generator; file i draws only from substream(seed, i), so
// per-file generation order never changes the data.
SynthRun gen_run(const SynthConfig& cfg);

// Writes one CSV ("file_000.csv", ...) per recording plus manifest.json
// into out_dir, and returns the manifest (with files[] filled).
signalio::RunManifest write_run(const SynthRun& run, const std::string& out_dir,
                                const std::string& config_digest = "");

}  // namespace airlfd::synthrig
