#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "airlfd/error.hpp"

namespace airlfd {

// Every pipeline parameter with its documented default. Keys in config
// files, AIRLFD_* environment variables, and --flags all use these names.
struct RunConfig {
  // synthetic rig
  int n_files = 60;
  int samples_per_file = 8192;
  int onset_file = 30;  // -1 = none
  std::string regime = "impulse-ramp";
  double ar_radius = 0.95;
  double ar_angle = 0.62831853071795864769;  // 2*pi/10
  double noise_std = 0.05;
  // windowing
  int win_len = 256;
  int stride = 256;
  std::string mode = "decimate(4)";
  // adversarial training
  long total_steps = 5000;
  int batch_size = 128;
  int disc_steps_per_round = 1;
  int gen_steps_per_round = 1;
  double gamma = 0.9;
  double lr_disc = 3e-4;
  double lr_policy = 3e-4;
  double logit_clamp = 40.0;
  double log_std_init = -0.5;
  std::vector<int> policy_hidden = {64};
  std::vector<int> reward_hidden = {64, 64};
  std::vector<int> value_hidden = {64};
  // baselines
  int iforest_psi = 256;
  int iforest_trees = 100;
  int ae_steps = 2000;
  int ae_batch_size = 64;
  int ae_hidden = 32;
  int ae_latent = 8;
  int static_steps = 3000;
  int static_batch_size = 128;
  int static_hidden = 64;
  int static_noise_dim = 16;
  // detection
  std::string threshold_method = "sigma_rule";
  double sigma_k = 3.0;
  int persistence = 3;
  double healthy_val_frac = 0.2;
  // run plumbing
  std::uint64_t seed = 1;
  std::string model = "airl";  // airl | iforest | ae | static
  std::string out_dir = "out";
  std::string manifest_path;  // empty -> <out_dir>/manifest.json
  std::string model_path;     // empty -> <out_dir>/model.json

  std::string manifest_file() const;
  std::string model_file() const;
  std::string scores_file() const;  // <out_dir>/scores_<model>.csv
  std::string detect_file() const;
  std::string report_file() const;
  std::string plot_file() const;

  // Stable fingerprint of the canonical key-sorted form; embedded in every
  // output file.
  std::string digest() const;
};

// Precedence: defaults, then config file, then AIRLFD_* environment
// variables, then explicit overrides (CLI flags). Unknown keys and wrongly
// typed values are rejected by name.
RunConfig parse_config(const std::string& config_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {},
                       bool use_env = true);

// The known keys, for CLI flag generation.
std::vector<std::string> config_keys();

}  // namespace airlfd
