#pragma once

#include <cstdint>
#include <vector>

#include "airlfd/numcore.hpp"
#include "airlfd/signalio.hpp"

namespace airlfd::baselines {

using signalio::FeatureVec;

// --- isolation forest -------------------------------------------------------

struct IsoNode {
  int feature = -1;  // -1 marks a leaf
  double split = 0.0;
  int left = -1, right = -1;
  int size = 0;  // residual sample count at a leaf
};

struct IsoTree {
  std::vector<IsoNode> nodes;  // nodes[0] is the root
};

struct IsoForest {
  std::vector<IsoTree> trees;
  int psi = 256;
  int height_limit = 8;
};

// Average unsuccessful-search depth c(n); c(n <= 1) = 0.
double iforest_cfactor(int n);

IsoForest iforest_fit(const std::vector<FeatureVec>& windows, int psi = 256, int n_trees = 100,
                      std::uint64_t seed = 1);
double iforest_path_length(const IsoForest& forest, const FeatureVec& window);
// 2^(-E[h]/c(psi)); higher = more anomalous.
double iforest_score(const IsoForest& forest, const FeatureVec& window);

// --- window autoencoder -----------------------------------------------------

struct AeConfig {
  int steps = 2000;
  int batch_size = 64;
  double lr = 3e-4;
  int hidden = 32;
  int latent = 8;
  std::uint64_t seed = 1;
};

struct WindowAE {
  numcore::MlpParams encoder;  // d -> hidden -> latent, tanh throughout
  numcore::MlpParams decoder;  // latent -> hidden -> d, identity output
};

WindowAE ae_fit(const std::vector<FeatureVec>& windows, const AeConfig& cfg);
// Mean squared reconstruction error over the window's coordinates.
double ae_score(const WindowAE& ae, const FeatureVec& window);

// --- static adversarial discriminator (the gamma = 0 ablation) --------------

struct StaticConfig {
  int steps = 3000;
  int batch_size = 128;
  double lr = 3e-4;
  int hidden = 64;
  int noise_dim = 16;
  double logit_clamp = 40.0;
  std::uint64_t seed = 1;
};

// Per-window GAN discriminator: no transitions, no value net, no discount.
struct StaticDisc {
  numcore::MlpParams disc;       // d -> 1
  numcore::MlpParams generator;  // noise_dim -> d
  double logit_clamp = 40.0;
};

StaticDisc static_fit(const std::vector<FeatureVec>& windows, const StaticConfig& cfg);
// 1 - sigmoid(disc logit); higher = more anomalous.
double static_score(const StaticDisc& sd, const FeatureVec& window);

}  // namespace airlfd::baselines
