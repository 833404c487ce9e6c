#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "airlfd/error.hpp"
#include "airlfd/rng.hpp"

namespace airlfd::numcore {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { Tanh, Identity };

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  Activation activation = Activation::Tanh;
};

// Fully-connected network parameters. Weight matrices are out_dim x in_dim;
// samples are columns, so a batched forward is one GEMM per layer.
struct MlpParams {
  std::vector<LayerSpec> specs;
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;

  int input_dim() const { return specs.empty() ? 0 : specs.front().in_dim; }
  int output_dim() const { return specs.empty() ? 0 : specs.back().out_dim; }
  std::size_t layer_count() const { return specs.size(); }
};

// Tanh hidden layers with an identity output layer, e.g. {128, 64, 1}.
std::vector<LayerSpec> mlp_chain(const std::vector<int>& dims);

// Activations recorded by forward() for the backward pass.
struct ForwardCache {
  MatrixXd input;              // network input, one column per sample
  std::vector<MatrixXd> post;  // post[l]: activated output of layer l
};

struct MlpGrads {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;
};

// Xavier-uniform weights (bound sqrt(6/(in+out))), zero biases. Weights are
// filled row-major from a single splitmix64 stream, so any port that follows
// the same order reproduces the initialization bit for bit.
MlpParams init_mlp(std::vector<LayerSpec> specs, std::uint64_t seed);

MatrixXd forward(const MlpParams& params, const MatrixXd& x, ForwardCache* cache = nullptr);
VectorXd forward(const MlpParams& params, const VectorXd& x);

// Reverse-mode gradients of sum_b y_b . dy_b with respect to all parameters,
// plus the gradient with respect to the input.
std::pair<MlpGrads, MatrixXd> backward(const MlpParams& params, const ForwardCache& cache,
                                       const MatrixXd& dy);

MlpGrads zero_grads(const MlpParams& params);
void accumulate(MlpGrads& into, const MlpGrads& from, double scale = 1.0);
bool all_finite(const MlpParams& params);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  long step = 0;
  std::vector<MatrixXd> m_w, v_w;
  std::vector<VectorXd> m_b, v_b;
};

AdamState make_adam(const MlpParams& params, const AdamConfig& cfg = {});

// Standard bias-corrected Adam update, in place.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state);

// Adam for a flat vector parameter (e.g. the policy log-std).
struct AdamVecState {
  AdamConfig cfg;
  long step = 0;
  VectorXd m, v;
};

AdamVecState make_adam_vec(Eigen::Index size, const AdamConfig& cfg = {});
void adam_step_vec(VectorXd& param, const VectorXd& grad, AdamVecState& state);

// Central-difference check of analytic parameter gradients against a scalar
// loss. Returns max over parameters of |analytic - numeric| / max(1, |numeric|).
double grad_check(const MlpParams& params, const MlpGrads& analytic,
                  const std::function<double(const MlpParams&)>& loss, double eps = 1e-5);

}  // namespace airlfd::numcore
