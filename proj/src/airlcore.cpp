#include "airlfd/airlcore.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "airlfd/ioutil.hpp"

namespace airlfd::airlcore {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

using Eigen::ArrayXd;
using Eigen::RowVectorXd;

double clamp_logit(double raw, double logit_clamp) {
  return std::min(std::max(raw, -logit_clamp), logit_clamp);
}

void check_state_dims(const AirlModel& model, Eigen::Index d) {
  if (model.policy.mean_net.input_dim() != d || model.policy.log_std.size() != d ||
      model.disc.reward_net.input_dim() != 2 * d || model.disc.value_net.input_dim() != d)
    fail(ErrorCode::DimMismatch, "state dim " + std::to_string(d) + " does not match model nets");
}

// Sub-terms of one batched discriminator evaluation, one column per sample.
struct BatchTerms {
  RowVectorXd r, v_s, v_next, log_pi, f, raw;
};

BatchTerms eval_terms(const StructuredDiscriminator& disc, const GaussianPolicy& policy,
                      const MatrixXd& s, const MatrixXd& a, const MatrixXd& s_next,
                      numcore::ForwardCache* reward_cache, numcore::ForwardCache* value_s_cache,
                      numcore::ForwardCache* value_next_cache) {
  const Eigen::Index d = s.rows();
  const Eigen::Index b = s.cols();
  MatrixXd x(2 * d, b);
  x.topRows(d) = s;
  x.bottomRows(d) = a;
  BatchTerms t;
  t.r = numcore::forward(disc.reward_net, x, reward_cache).row(0);
  t.v_s = numcore::forward(disc.value_net, s, value_s_cache).row(0);
  t.v_next = numcore::forward(disc.value_net, s_next, value_next_cache).row(0);
  t.log_pi = policy_logdensity_batch(policy, s, a).transpose();
  t.f = t.r + disc.gamma * t.v_next - t.v_s;
  t.raw = t.f - t.log_pi;
  return t;
}

MatrixXd draw_gaussian(Eigen::Index rows, Eigen::Index cols, SplitMix64& rng) {
  MatrixXd eps(rows, cols);
  for (Eigen::Index b = 0; b < cols; ++b)
    for (Eigen::Index j = 0; j < rows; ++j) eps(j, b) = rng.gaussian();
  return eps;
}

// Yields batch_size expert indices per call, reshuffling each pass.
struct MinibatchSampler {
  MinibatchSampler(std::size_t n, int batch, SplitMix64& rng) : batch_(batch), rng_(rng) {
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    pos_ = n;  // force shuffle on first use
  }

  const std::size_t* next() {
    if (pos_ + static_cast<std::size_t>(batch_) > perm_.size()) {
      airlfd::shuffle(perm_, rng_);
      pos_ = 0;
    }
    const std::size_t* out = perm_.data() + pos_;
    pos_ += static_cast<std::size_t>(batch_);
    return out;
  }

  int batch_;
  SplitMix64& rng_;
  std::vector<std::size_t> perm_;
  std::size_t pos_ = 0;
};

MatrixXd gather_cols(const MatrixXd& all, const std::size_t* idx, int count) {
  MatrixXd out(all.rows(), count);
  for (int k = 0; k < count; ++k) out.col(k) = all.col(static_cast<Eigen::Index>(idx[k]));
  return out;
}

nlohmann::json net_to_json(const numcore::MlpParams& net) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto& spec = net.specs[l];
    nlohmann::json layer;
    layer["in_dim"] = spec.in_dim;
    layer["out_dim"] = spec.out_dim;
    layer["activation"] = spec.activation == numcore::Activation::Tanh ? "tanh" : "identity";
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(spec.in_dim) * spec.out_dim);
    for (int i = 0; i < spec.out_dim; ++i)
      for (int j = 0; j < spec.in_dim; ++j) w.push_back(net.weights[l](i, j));
    layer["weights"] = w;
    std::vector<double> bias(net.biases[l].data(), net.biases[l].data() + spec.out_dim);
    layer["bias"] = bias;
    layers.push_back(std::move(layer));
  }
  return nlohmann::json{{"layers", std::move(layers)}};
}

numcore::MlpParams net_from_json(const nlohmann::json& doc, const std::string& what) {
  numcore::MlpParams net;
  if (!doc.contains("layers") || !doc["layers"].is_array() || doc["layers"].empty())
    fail(ErrorCode::BadFormat, what + ": missing layers");
  for (const auto& layer : doc["layers"]) {
    numcore::LayerSpec spec;
    spec.in_dim = layer.at("in_dim").get<int>();
    spec.out_dim = layer.at("out_dim").get<int>();
    const std::string act = layer.at("activation").get<std::string>();
    if (act == "tanh")
      spec.activation = numcore::Activation::Tanh;
    else if (act == "identity")
      spec.activation = numcore::Activation::Identity;
    else
      fail(ErrorCode::BadFormat, what + ": unknown activation '" + act + "'");
    if (spec.in_dim < 1 || spec.out_dim < 1) fail(ErrorCode::BadFormat, what + ": bad layer dims");
    const auto w = layer.at("weights").get<std::vector<double>>();
    const auto bias = layer.at("bias").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(spec.in_dim) * spec.out_dim ||
        bias.size() != static_cast<std::size_t>(spec.out_dim))
      fail(ErrorCode::BadFormat, what + ": weight/bias shape mismatch");
    MatrixXd weights(spec.out_dim, spec.in_dim);
    for (int i = 0; i < spec.out_dim; ++i)
      for (int j = 0; j < spec.in_dim; ++j)
        weights(i, j) = w[static_cast<std::size_t>(i) * spec.in_dim + j];
    net.specs.push_back(spec);
    net.weights.push_back(std::move(weights));
    net.biases.push_back(Eigen::Map<const VectorXd>(bias.data(), spec.out_dim));
  }
  for (std::size_t l = 1; l < net.layer_count(); ++l)
    if (net.specs[l].in_dim != net.specs[l - 1].out_dim)
      fail(ErrorCode::BadFormat, what + ": layer dims do not chain");
  return net;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

TransitionBatch pack(std::span<const Transition> transitions) {
  if (transitions.empty()) fail(ErrorCode::EmptyBatch, "no transitions to pack");
  const Eigen::Index d = transitions[0].s.size();
  TransitionBatch batch;
  batch.s.resize(d, static_cast<Eigen::Index>(transitions.size()));
  batch.a.resize(d, static_cast<Eigen::Index>(transitions.size()));
  batch.s_next.resize(d, static_cast<Eigen::Index>(transitions.size()));
  for (std::size_t k = 0; k < transitions.size(); ++k) {
    const Transition& t = transitions[k];
    if (t.s.size() != d || t.a.size() != d || t.s_next.size() != d)
      fail(ErrorCode::DimMismatch, "transition " + std::to_string(k) + " has inconsistent dims");
    batch.s.col(static_cast<Eigen::Index>(k)) = t.s;
    batch.a.col(static_cast<Eigen::Index>(k)) = t.a;
    batch.s_next.col(static_cast<Eigen::Index>(k)) = t.s_next;
  }
  return batch;
}

VectorXd policy_logdensity_batch(const GaussianPolicy& policy, const MatrixXd& s,
                                 const MatrixXd& a) {
  const Eigen::Index d = policy.mean_net.input_dim();
  if (s.rows() != d || a.rows() != d || policy.log_std.size() != d ||
      policy.mean_net.output_dim() != d || s.cols() != a.cols())
    fail(ErrorCode::DimMismatch, "policy_logdensity: dims do not match policy");
  const MatrixXd mu = numcore::forward(policy.mean_net, s);
  const ArrayXd inv_sigma = (-policy.log_std.array()).exp();
  const MatrixXd z = ((a - mu).array().colwise() * inv_sigma).matrix();
  const double constant = 2.0 * policy.log_std.sum() + static_cast<double>(d) * kLog2Pi;
  VectorXd out(s.cols());
  for (Eigen::Index b = 0; b < s.cols(); ++b)
    out(b) = -0.5 * (z.col(b).squaredNorm() + constant);
  return out;
}

double policy_logdensity(const GaussianPolicy& policy, const VectorXd& s, const VectorXd& a) {
  return policy_logdensity_batch(policy, s, a)(0);
}

MatrixXd policy_sample_batch(const GaussianPolicy& policy, const MatrixXd& s, SplitMix64& rng,
                             MatrixXd* eps_out) {
  const Eigen::Index d = policy.mean_net.input_dim();
  if (s.rows() != d) fail(ErrorCode::DimMismatch, "policy_sample: state dim mismatch");
  const MatrixXd mu = numcore::forward(policy.mean_net, s);
  const MatrixXd eps = draw_gaussian(d, s.cols(), rng);
  const ArrayXd sigma = policy.log_std.array().exp();
  MatrixXd a = mu + (eps.array().colwise() * sigma).matrix();
  if (eps_out) *eps_out = eps;
  return a;
}

VectorXd policy_sample(const GaussianPolicy& policy, const VectorXd& s, SplitMix64& rng,
                       VectorXd* eps_out) {
  MatrixXd eps;
  const MatrixXd a = policy_sample_batch(policy, s, rng, &eps);
  if (eps_out) *eps_out = eps.col(0);
  return a.col(0);
}

double disc_logit(const StructuredDiscriminator& disc, const GaussianPolicy& policy,
                  const VectorXd& s, const VectorXd& a, const VectorXd& s_next,
                  double logit_clamp, DiscTerms* terms) {
  if (s.size() != a.size() || s.size() != s_next.size())
    fail(ErrorCode::DimMismatch, "disc_logit: s/a/s_next dims differ");
  const BatchTerms t =
      eval_terms(disc, policy, s, a, s_next, nullptr, nullptr, nullptr);
  const double logit = clamp_logit(t.raw(0), logit_clamp);
  if (terms) {
    terms->reward = t.r(0);
    terms->value_s = t.v_s(0);
    terms->value_s_next = t.v_next(0);
    terms->log_pi = t.log_pi(0);
    terms->f = t.f(0);
    terms->logit = logit;
  }
  return logit;
}

double disc_prob(const StructuredDiscriminator& disc, const GaussianPolicy& policy,
                 const VectorXd& s, const VectorXd& a, const VectorXd& s_next,
                 double logit_clamp) {
  return sigmoid(disc_logit(disc, policy, s, a, s_next, logit_clamp));
}

VectorXd disc_prob_batch(const StructuredDiscriminator& disc, const GaussianPolicy& policy,
                         const TransitionBatch& batch, double logit_clamp) {
  const BatchTerms t = eval_terms(disc, policy, batch.s, batch.a, batch.s_next, nullptr, nullptr,
                                  nullptr);
  VectorXd out(batch.size());
  for (Eigen::Index b = 0; b < batch.size(); ++b)
    out(b) = sigmoid(clamp_logit(t.raw(b), logit_clamp));
  return out;
}

DiscAdam make_disc_adam(const AirlModel& model, double lr) {
  numcore::AdamConfig cfg;
  cfg.lr = lr;
  return DiscAdam{numcore::make_adam(model.disc.reward_net, cfg),
                  numcore::make_adam(model.disc.value_net, cfg)};
}

PolicyAdam make_policy_adam(const AirlModel& model, double lr) {
  numcore::AdamConfig cfg;
  cfg.lr = lr;
  return PolicyAdam{numcore::make_adam(model.policy.mean_net, cfg),
                    numcore::make_adam_vec(model.policy.log_std.size(), cfg)};
}

DiscGrads disc_loss_and_grads(const AirlModel& model, const TransitionBatch& expert,
                              const TransitionBatch& generated) {
  if (expert.size() == 0 || generated.size() == 0)
    fail(ErrorCode::EmptyBatch, "disc_update: empty batch");
  const Eigen::Index d = expert.s.rows();
  if (generated.s.rows() != d) fail(ErrorCode::DimMismatch, "disc_update: batch dims differ");
  check_state_dims(model, d);

  const Eigen::Index be = expert.size();
  const Eigen::Index bg = generated.size();
  const Eigen::Index b = be + bg;
  MatrixXd s(d, b), a(d, b), s_next(d, b);
  s << expert.s, generated.s;
  a << expert.a, generated.a;
  s_next << expert.s_next, generated.s_next;

  numcore::ForwardCache reward_cache, value_s_cache, value_next_cache;
  const BatchTerms t = eval_terms(model.disc, model.policy, s, a, s_next, &reward_cache,
                                  &value_s_cache, &value_next_cache);

  // The loss runs on raw logits: softplus is stable at any magnitude, and in
  // high dimension -log pi alone exceeds any sane clamp, so clamping here
  // would freeze training before it starts. The clamp only bounds the
  // probabilities reported by disc_prob.
  DiscGrads out;
  double loss = 0.0;
  double correct = 0.0;
  MatrixXd g(1, b);  // dLoss/dlogit
  for (Eigen::Index k = 0; k < b; ++k) {
    const double raw = t.raw(k);
    const double p = sigmoid(raw);
    const bool is_expert = k < be;
    loss += is_expert ? softplus(-raw) : softplus(raw);
    correct += is_expert ? (raw > 0.0) : (raw < 0.0);
    g(0, k) = (is_expert ? p - 1.0 : p) / static_cast<double>(b);
  }
  out.loss = loss / static_cast<double>(b);
  out.accuracy = correct / static_cast<double>(b);

  auto [reward_grads, dx_reward] = numcore::backward(model.disc.reward_net, reward_cache, g);
  auto [value_grads, dx_next] =
      numcore::backward(model.disc.value_net, value_next_cache, model.disc.gamma * g);
  auto [value_grads_s, dx_s] = numcore::backward(model.disc.value_net, value_s_cache, -g);
  numcore::accumulate(value_grads, value_grads_s);
  out.reward = std::move(reward_grads);
  out.value = std::move(value_grads);
  return out;
}

DiscUpdateResult disc_update(AirlModel& model, const TransitionBatch& expert,
                             const TransitionBatch& generated, DiscAdam& adam) {
  DiscGrads grads = disc_loss_and_grads(model, expert, generated);
  numcore::adam_step(model.disc.reward_net, grads.reward, adam.reward);
  numcore::adam_step(model.disc.value_net, grads.value, adam.value);
  return {grads.loss, grads.accuracy};
}

double disc_update(AirlModel& model, std::span<const Transition> expert,
                   std::span<const Transition> generated, DiscAdam& adam) {
  if (expert.empty() || generated.empty()) fail(ErrorCode::EmptyBatch, "disc_update: empty batch");
  return disc_update(model, pack(expert), pack(generated), adam).loss;
}

TransitionBatch sample_generated_batch(const AirlModel& model, const MatrixXd& states,
                                       SplitMix64& rng, MatrixXd* eps_out) {
  if (states.cols() == 0) fail(ErrorCode::EmptyBatch, "sample_generated: no states");
  check_state_dims(model, states.rows());
  TransitionBatch batch;
  batch.s = states;
  batch.a = policy_sample_batch(model.policy, states, rng, eps_out);
  batch.s_next = batch.a;  // proxy dynamics: the action is the next state
  return batch;
}

std::vector<Transition> sample_generated(const AirlModel& model,
                                         std::span<const signalio::FeatureVec> expert_states,
                                         SplitMix64& rng) {
  if (expert_states.empty()) fail(ErrorCode::EmptyBatch, "sample_generated: no states");
  const Eigen::Index d = expert_states[0].size();
  MatrixXd states(d, static_cast<Eigen::Index>(expert_states.size()));
  for (std::size_t k = 0; k < expert_states.size(); ++k) {
    if (expert_states[k].size() != d)
      fail(ErrorCode::DimMismatch, "sample_generated: state dims differ");
    states.col(static_cast<Eigen::Index>(k)) = expert_states[k];
  }
  const TransitionBatch batch = sample_generated_batch(model, states, rng);
  std::vector<Transition> out(expert_states.size());
  for (std::size_t k = 0; k < expert_states.size(); ++k) {
    out[k].s = batch.s.col(static_cast<Eigen::Index>(k));
    out[k].a = batch.a.col(static_cast<Eigen::Index>(k));
    out[k].s_next = batch.s_next.col(static_cast<Eigen::Index>(k));
    out[k].trajectory_id = -1;  // synthetic tag
  }
  return out;
}

PolicyObjective policy_objective(const AirlModel& model, const MatrixXd& states,
                                 const MatrixXd& eps) {
  const Eigen::Index d = states.rows();
  const Eigen::Index b = states.cols();
  if (b == 0) fail(ErrorCode::EmptyBatch, "policy_objective: no states");
  if (eps.rows() != d || eps.cols() != b)
    fail(ErrorCode::DimMismatch, "policy_objective: eps shape mismatch");
  check_state_dims(model, d);

  numcore::ForwardCache mean_cache;
  const MatrixXd mu = numcore::forward(model.policy.mean_net, states, &mean_cache);
  const ArrayXd sigma = model.policy.log_std.array().exp();
  const MatrixXd actions = mu + (eps.array().colwise() * sigma).matrix();

  MatrixXd x(2 * d, b);
  x.topRows(d) = states;
  x.bottomRows(d) = actions;
  numcore::ForwardCache reward_cache, value_a_cache;
  const RowVectorXd r = numcore::forward(model.disc.reward_net, x, &reward_cache).row(0);
  const RowVectorXd v_a = numcore::forward(model.disc.value_net, actions, &value_a_cache).row(0);
  const RowVectorXd v_s = numcore::forward(model.disc.value_net, states).row(0);

  // log pi(a|s) in reparameterized form: only eps and log_std appear.
  const double log_std_sum = model.policy.log_std.sum();
  double objective = 0.0;
  for (Eigen::Index k = 0; k < b; ++k) {
    const double log_pi =
        -0.5 * (eps.col(k).squaredNorm() + 2.0 * log_std_sum + static_cast<double>(d) * kLog2Pi);
    objective += r(k) + model.disc.gamma * v_a(k) - v_s(k) - log_pi;
  }
  objective /= static_cast<double>(b);

  // dJ/d(action), through the frozen reward and value nets.
  const double inv_b = 1.0 / static_cast<double>(b);
  auto [reward_grads, dx_reward] =
      numcore::backward(model.disc.reward_net, reward_cache, MatrixXd::Constant(1, b, inv_b));
  auto [value_grads, dx_value] = numcore::backward(
      model.disc.value_net, value_a_cache, MatrixXd::Constant(1, b, model.disc.gamma * inv_b));
  const MatrixXd d_action = dx_reward.bottomRows(d) + dx_value;

  PolicyObjective out;
  out.objective = objective;
  out.mean_grads = numcore::backward(model.policy.mean_net, mean_cache, d_action).first;
  out.log_std_grad.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    // action_j = mu_j + sigma_j*eps_j, plus the entropy term's constant +1.
    out.log_std_grad(j) =
        sigma(j) * (d_action.row(j).array() * eps.row(j).array()).sum() + 1.0;
  }
  return out;
}

double policy_update(AirlModel& model, const MatrixXd& states, SplitMix64& rng,
                     PolicyAdam& adam) {
  const MatrixXd eps = draw_gaussian(states.rows(), states.cols(), rng);
  PolicyObjective po = policy_objective(model, states, eps);

  numcore::MlpGrads descent = numcore::zero_grads(model.policy.mean_net);
  numcore::accumulate(descent, po.mean_grads, -1.0);  // Adam minimizes; we ascend
  numcore::adam_step(model.policy.mean_net, descent, adam.mean);
  VectorXd neg_log_std_grad = -po.log_std_grad;
  numcore::adam_step_vec(model.policy.log_std, neg_log_std_grad, adam.log_std);
  for (Eigen::Index j = 0; j < model.policy.log_std.size(); ++j)
    model.policy.log_std(j) = std::min(std::max(model.policy.log_std(j), kLogStdMin), kLogStdMax);
  return po.objective;
}

AirlModel train_airl(const TransitionSet& expert, const TrainConfig& cfg,
                     const signalio::Normalizer& normalizer,
                     const signalio::FeatureConfig& feature) {
  if (cfg.total_steps < 1 || cfg.batch_size < 1 || cfg.disc_steps_per_round < 1 ||
      cfg.gen_steps_per_round < 1)
    fail(ErrorCode::BadConfig, "train_airl: counts must be >= 1");
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0))
    fail(ErrorCode::BadConfig, "train_airl: gamma must be in [0,1)");
  if (cfg.logit_clamp <= 0.0) fail(ErrorCode::BadConfig, "train_airl: logit_clamp must be > 0");
  if (cfg.lr_disc <= 0.0 || cfg.lr_policy <= 0.0)
    fail(ErrorCode::BadConfig, "train_airl: learning rates must be > 0");
  const std::size_t n = expert.size();
  if (n < static_cast<std::size_t>(cfg.batch_size))
    fail(ErrorCode::InsufficientData, "train_airl: " + std::to_string(n) +
                                          " transitions < batch_size " +
                                          std::to_string(cfg.batch_size));

  const Eigen::Index d = expert.transitions[0].s.size();
  const TransitionBatch all = pack(expert.transitions);

  auto dims_with = [](Eigen::Index in, const std::vector<int>& hidden, Eigen::Index out) {
    std::vector<int> dims{static_cast<int>(in)};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(static_cast<int>(out));
    return dims;
  };

  AirlModel model;
  model.policy.mean_net =
      numcore::init_mlp(numcore::mlp_chain(dims_with(d, cfg.policy_hidden, d)),
                        substream(cfg.seed, 1).state_);
  model.policy.log_std = VectorXd::Constant(
      d, std::min(std::max(cfg.log_std_init, kLogStdMin), kLogStdMax));
  model.disc.reward_net =
      numcore::init_mlp(numcore::mlp_chain(dims_with(2 * d, cfg.reward_hidden, 1)),
                        substream(cfg.seed, 2).state_);
  model.disc.value_net =
      numcore::init_mlp(numcore::mlp_chain(dims_with(d, cfg.value_hidden, 1)),
                        substream(cfg.seed, 3).state_);
  model.disc.gamma = cfg.gamma;
  model.normalizer = normalizer;
  model.feature = feature;
  model.seed = cfg.seed;

  DiscAdam disc_adam = make_disc_adam(model, cfg.lr_disc);
  PolicyAdam policy_adam = make_policy_adam(model, cfg.lr_policy);
  SplitMix64 shuffle_rng = substream(cfg.seed, 4);
  SplitMix64 noise_rng = substream(cfg.seed, 5);
  MinibatchSampler sampler(n, cfg.batch_size, shuffle_rng);

  model.history.disc_loss.reserve(static_cast<std::size_t>(cfg.total_steps));
  model.history.gen_objective.reserve(static_cast<std::size_t>(cfg.total_steps));
  model.history.disc_accuracy.reserve(static_cast<std::size_t>(cfg.total_steps));

  for (long round = 0; round < cfg.total_steps; ++round) {
    DiscUpdateResult disc_result{};
    for (int k = 0; k < cfg.disc_steps_per_round; ++k) {
      TransitionBatch expert_batch;
      {
        const std::size_t* idx = sampler.next();
        expert_batch.s = gather_cols(all.s, idx, cfg.batch_size);
        expert_batch.a = gather_cols(all.a, idx, cfg.batch_size);
        expert_batch.s_next = gather_cols(all.s_next, idx, cfg.batch_size);
      }
      const MatrixXd anchor_states =
          gather_cols(all.s, sampler.next(), cfg.batch_size);
      const TransitionBatch generated = sample_generated_batch(model, anchor_states, noise_rng);
      disc_result = disc_update(model, expert_batch, generated, disc_adam);
    }
    double objective = 0.0;
    for (int k = 0; k < cfg.gen_steps_per_round; ++k) {
      const MatrixXd states = gather_cols(all.s, sampler.next(), cfg.batch_size);
      objective = policy_update(model, states, noise_rng, policy_adam);
    }
    model.history.disc_loss.push_back(disc_result.loss);
    model.history.gen_objective.push_back(objective);
    model.history.disc_accuracy.push_back(disc_result.accuracy);
    if (!std::isfinite(disc_result.loss) || !std::isfinite(objective))
      fail(ErrorCode::NumericFailure,
           "train_airl: diverged at round " + std::to_string(round + 1));
  }

  const std::size_t rounds = model.history.disc_accuracy.size();
  const std::size_t tail = std::min<std::size_t>(rounds, 100);
  double acc = 0.0;
  for (std::size_t k = rounds - tail; k < rounds; ++k) acc += model.history.disc_accuracy[k];
  model.history.final_accuracy = tail > 0 ? acc / static_cast<double>(tail) : 0.0;
  model.steps = cfg.total_steps;
  return model;
}

void save_model(const AirlModel& model, const std::string& path,
                const std::string& config_digest) {
  if (!numcore::all_finite(model.policy.mean_net) || !numcore::all_finite(model.disc.reward_net) ||
      !numcore::all_finite(model.disc.value_net) || !model.policy.log_std.allFinite())
    fail(ErrorCode::NumericFailure, "save_model: non-finite parameters");
  nlohmann::json doc;
  doc["format_version"] = "1";
  doc["state_dim"] = model.policy.mean_net.input_dim();
  doc["gamma"] = model.disc.gamma;
  doc["feature"] = {{"win_len", model.feature.win_len},
                    {"stride", model.feature.stride},
                    {"mode", model.feature.mode.str()}};
  doc["normalizer"] = {{"mean", model.normalizer.mean}, {"std", model.normalizer.std}};
  doc["policy"] = net_to_json(model.policy.mean_net);
  doc["policy"]["log_std"] = std::vector<double>(
      model.policy.log_std.data(), model.policy.log_std.data() + model.policy.log_std.size());
  doc["reward_net"] = net_to_json(model.disc.reward_net);
  doc["value_net"] = net_to_json(model.disc.value_net);
  doc["meta"] = {{"seed", model.seed}, {"steps", model.steps}};
  if (!config_digest.empty()) doc["config_digest"] = config_digest;
  write_file_atomic(path, doc.dump(2) + "\n");
}

AirlModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MissingFile, "cannot open model " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadFormat, "model " + path + ": " + e.what());
  }
  AirlModel model;
  try {
    const std::string version = doc.at("format_version").get<std::string>();
    if (version != "1")
      fail(ErrorCode::BadFormat,
           "model format_version '" + version + "' unsupported, reader supports '1'");
    const int d = doc.at("state_dim").get<int>();
    model.disc.gamma = doc.at("gamma").get<double>();
    model.feature.win_len = doc.at("feature").at("win_len").get<int>();
    model.feature.stride = doc.at("feature").at("stride").get<int>();
    model.feature.mode = signalio::FeatureMode::parse(doc.at("feature").at("mode").get<std::string>());
    model.normalizer.mean = doc.at("normalizer").at("mean").get<double>();
    model.normalizer.std = doc.at("normalizer").at("std").get<double>();
    model.policy.mean_net = net_from_json(doc.at("policy"), "policy");
    const auto log_std = doc.at("policy").at("log_std").get<std::vector<double>>();
    model.policy.log_std =
        Eigen::Map<const VectorXd>(log_std.data(), static_cast<Eigen::Index>(log_std.size()));
    model.disc.reward_net = net_from_json(doc.at("reward_net"), "reward_net");
    model.disc.value_net = net_from_json(doc.at("value_net"), "value_net");
    model.seed = doc.at("meta").at("seed").get<std::uint64_t>();
    model.steps = doc.at("meta").at("steps").get<long>();

    if (model.policy.mean_net.input_dim() != d || model.policy.mean_net.output_dim() != d ||
        model.policy.log_std.size() != d || model.disc.reward_net.input_dim() != 2 * d ||
        model.disc.reward_net.output_dim() != 1 || model.disc.value_net.input_dim() != d ||
        model.disc.value_net.output_dim() != 1)
      fail(ErrorCode::BadFormat, "model " + path + ": net shapes do not match state_dim");
    if (model.feature.state_dim() != d)
      fail(ErrorCode::BadFormat, "model " + path + ": feature config does not match state_dim");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadFormat, "model " + path + ": " + e.what());
  }
  return model;
}

}  // namespace airlfd::airlcore
