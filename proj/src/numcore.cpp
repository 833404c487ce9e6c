#include "airlfd/numcore.hpp"

#include <cmath>
#include <string>

namespace airlfd::numcore {

namespace {

void check_chain(const std::vector<LayerSpec>& specs) {
  if (specs.empty()) fail(ErrorCode::DimMismatch, "network needs at least one layer");
  for (const auto& spec : specs) {
    if (spec.in_dim < 1 || spec.out_dim < 1)
      fail(ErrorCode::DimMismatch, "layer dims must be >= 1");
  }
  for (std::size_t l = 1; l < specs.size(); ++l) {
    if (specs[l].in_dim != specs[l - 1].out_dim)
      fail(ErrorCode::DimMismatch,
           "layer " + std::to_string(l) + " expects " + std::to_string(specs[l].in_dim) +
               " inputs but the previous layer produces " + std::to_string(specs[l - 1].out_dim));
  }
}

}  // namespace

std::vector<LayerSpec> mlp_chain(const std::vector<int>& dims) {
  std::vector<LayerSpec> specs;
  if (dims.size() < 2) fail(ErrorCode::DimMismatch, "mlp_chain needs at least two dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = (i + 2 == dims.size());
    specs.push_back({dims[i], dims[i + 1], last ? Activation::Identity : Activation::Tanh});
  }
  return specs;
}

MlpParams init_mlp(std::vector<LayerSpec> specs, std::uint64_t seed) {
  check_chain(specs);
  MlpParams params;
  params.specs = std::move(specs);
  SplitMix64 rng(seed);
  for (const auto& spec : params.specs) {
    const double bound = std::sqrt(6.0 / (spec.in_dim + spec.out_dim));
    MatrixXd w(spec.out_dim, spec.in_dim);
    for (int r = 0; r < spec.out_dim; ++r)
      for (int c = 0; c < spec.in_dim; ++c) w(r, c) = rng.uniform(-bound, bound);
    params.weights.push_back(std::move(w));
    params.biases.push_back(VectorXd::Zero(spec.out_dim));
  }
  return params;
}

MatrixXd forward(const MlpParams& params, const MatrixXd& x, ForwardCache* cache) {
  if (x.rows() != params.input_dim())
    fail(ErrorCode::DimMismatch, "forward: input has " + std::to_string(x.rows()) +
                                     " rows, network expects " + std::to_string(params.input_dim()));
  if (cache) {
    cache->input = x;
    cache->post.clear();
    cache->post.reserve(params.layer_count());
  }
  MatrixXd h = x;
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    MatrixXd z = (params.weights[l] * h).colwise() + params.biases[l];
    if (params.specs[l].activation == Activation::Tanh) z = z.array().tanh();
    if (cache) cache->post.push_back(z);
    h = std::move(z);
  }
  return h;
}

VectorXd forward(const MlpParams& params, const VectorXd& x) {
  return forward(params, MatrixXd(x), nullptr).col(0);
}

std::pair<MlpGrads, MatrixXd> backward(const MlpParams& params, const ForwardCache& cache,
                                       const MatrixXd& dy) {
  const std::size_t layers = params.layer_count();
  if (cache.post.size() != layers)
    fail(ErrorCode::ShapeMismatch, "backward: cache does not match network");
  if (dy.rows() != params.output_dim() || dy.cols() != cache.input.cols())
    fail(ErrorCode::ShapeMismatch, "backward: dy has shape " + std::to_string(dy.rows()) + "x" +
                                       std::to_string(dy.cols()));
  MlpGrads grads = zero_grads(params);
  MatrixXd delta = dy;
  for (std::size_t l = layers; l-- > 0;) {
    if (params.specs[l].activation == Activation::Tanh)
      delta.array() *= 1.0 - cache.post[l].array().square();
    const MatrixXd& input = (l == 0) ? cache.input : cache.post[l - 1];
    grads.weights[l].noalias() = delta * input.transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l > 0) delta = params.weights[l].transpose() * delta;
  }
  MatrixXd dx = params.weights[0].transpose() * delta;
  return {std::move(grads), std::move(dx)};
}

MlpGrads zero_grads(const MlpParams& params) {
  MlpGrads grads;
  for (const auto& spec : params.specs) {
    grads.weights.push_back(MatrixXd::Zero(spec.out_dim, spec.in_dim));
    grads.biases.push_back(VectorXd::Zero(spec.out_dim));
  }
  return grads;
}

void accumulate(MlpGrads& into, const MlpGrads& from, double scale) {
  if (into.weights.size() != from.weights.size())
    fail(ErrorCode::ShapeMismatch, "accumulate: gradient layer counts differ");
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    into.weights[l] += scale * from.weights[l];
    into.biases[l] += scale * from.biases[l];
  }
}

bool all_finite(const MlpParams& params) {
  for (std::size_t l = 0; l < params.layer_count(); ++l)
    if (!params.weights[l].allFinite() || !params.biases[l].allFinite()) return false;
  return true;
}

AdamState make_adam(const MlpParams& params, const AdamConfig& cfg) {
  AdamState state;
  state.cfg = cfg;
  for (const auto& spec : params.specs) {
    state.m_w.push_back(MatrixXd::Zero(spec.out_dim, spec.in_dim));
    state.v_w.push_back(MatrixXd::Zero(spec.out_dim, spec.in_dim));
    state.m_b.push_back(VectorXd::Zero(spec.out_dim));
    state.v_b.push_back(VectorXd::Zero(spec.out_dim));
  }
  return state;
}

namespace {

template <typename T>
void adam_update(T& param, const T& grad, T& m, T& v, const AdamConfig& cfg, double bc1,
                 double bc2) {
  m.array() = cfg.beta1 * m.array() + (1.0 - cfg.beta1) * grad.array();
  v.array() = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * grad.array().square();
  param.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

}  // namespace

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state) {
  if (grads.weights.size() != params.layer_count() || state.m_w.size() != params.layer_count())
    fail(ErrorCode::ShapeMismatch, "adam_step: layer counts differ");
  for (std::size_t l = 0; l < params.layer_count(); ++l)
    if (grads.weights[l].rows() != params.weights[l].rows() ||
        grads.weights[l].cols() != params.weights[l].cols() ||
        grads.biases[l].size() != params.biases[l].size())
      fail(ErrorCode::ShapeMismatch, "adam_step: gradient shape differs at layer " +
                                         std::to_string(l));
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    adam_update(params.weights[l], grads.weights[l], state.m_w[l], state.v_w[l], state.cfg, bc1,
                bc2);
    adam_update(params.biases[l], grads.biases[l], state.m_b[l], state.v_b[l], state.cfg, bc1, bc2);
  }
}

AdamVecState make_adam_vec(Eigen::Index size, const AdamConfig& cfg) {
  AdamVecState state;
  state.cfg = cfg;
  state.m = VectorXd::Zero(size);
  state.v = VectorXd::Zero(size);
  return state;
}

void adam_step_vec(VectorXd& param, const VectorXd& grad, AdamVecState& state) {
  if (grad.size() != param.size() || state.m.size() != param.size())
    fail(ErrorCode::ShapeMismatch, "adam_step_vec: size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.cfg.beta2, static_cast<double>(state.step));
  adam_update(param, grad, state.m, state.v, state.cfg, bc1, bc2);
}

double grad_check(const MlpParams& params, const MlpGrads& analytic,
                  const std::function<double(const MlpParams&)>& loss, double eps) {
  MlpParams probe = params;
  double worst = 0.0;
  auto check_entry = [&](double& slot, double analytic_g) {
    const double saved = slot;
    slot = saved + eps;
    const double up = loss(probe);
    slot = saved - eps;
    const double down = loss(probe);
    slot = saved;
    const double numeric = (up - down) / (2.0 * eps);
    const double rel = std::abs(analytic_g - numeric) / std::max(1.0, std::abs(numeric));
    if (rel > worst) worst = rel;
  };
  for (std::size_t l = 0; l < probe.layer_count(); ++l) {
    for (int r = 0; r < probe.weights[l].rows(); ++r)
      for (int c = 0; c < probe.weights[l].cols(); ++c)
        check_entry(probe.weights[l](r, c), analytic.weights[l](r, c));
    for (int r = 0; r < probe.biases[l].size(); ++r)
      check_entry(probe.biases[l](r), analytic.biases[l](r));
  }
  return worst;
}

}  // namespace airlfd::numcore
