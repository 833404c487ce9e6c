#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airlfd/numcore.hpp"
#include "airlfd/rng.hpp"
#include "airlfd/signalio.hpp"

namespace airlfd::airlcore {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using signalio::Transition;
using signalio::TransitionSet;

inline constexpr double kLogStdMin = -4.0;
inline constexpr double kLogStdMax = 1.0;
inline constexpr double kDefaultLogitClamp = 40.0;

// Diagonal-Gaussian transition policy: a ~ N(mean_net(s), diag(exp(log_std))^2).
// log_std is state-independent and clamped to [kLogStdMin, kLogStdMax].
struct GaussianPolicy {
  numcore::MlpParams mean_net;  // d -> d
  VectorXd log_std;             // d
};

// The structured discriminator: D = sigmoid(r(s,a) + gamma*V(s') - V(s) - log pi(a|s)).
struct StructuredDiscriminator {
  numcore::MlpParams reward_net;  // 2d -> 1, input is s stacked over a
  numcore::MlpParams value_net;   // d -> 1
  double gamma = 0.9;
};

struct TrainConfig {
  long total_steps = 5000;  // adversarial rounds
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
  std::uint64_t seed = 1;
};

struct TrainHistory {
  std::vector<double> disc_loss;
  std::vector<double> gen_objective;
  std::vector<double> disc_accuracy;
  double final_accuracy = 0.0;  // mean accuracy over the last rounds
};

// Everything needed to score a run: nets, discount, and the preprocessing
// that produced the training features.
struct AirlModel {
  GaussianPolicy policy;
  StructuredDiscriminator disc;
  signalio::Normalizer normalizer;
  signalio::FeatureConfig feature;
  std::uint64_t seed = 0;
  long steps = 0;
  TrainHistory history;  // kept in memory only, not serialized
};

// Column-per-transition layout used by the training loop and batch scoring.
struct TransitionBatch {
  MatrixXd s, a, s_next;  // d x B each

  Eigen::Index size() const { return s.cols(); }
};

TransitionBatch pack(std::span<const Transition> transitions);

// --- policy ---------------------------------------------------------------

double policy_logdensity(const GaussianPolicy& policy, const VectorXd& s, const VectorXd& a);
VectorXd policy_logdensity_batch(const GaussianPolicy& policy, const MatrixXd& s,
                                 const MatrixXd& a);

// a = mean(s) + exp(log_std) .* eps with eps ~ N(0, I); eps is recorded when
// eps_out is non-null so reparameterized gradients can reuse the draw.
VectorXd policy_sample(const GaussianPolicy& policy, const VectorXd& s, SplitMix64& rng,
                       VectorXd* eps_out = nullptr);
MatrixXd policy_sample_batch(const GaussianPolicy& policy, const MatrixXd& s, SplitMix64& rng,
                             MatrixXd* eps_out = nullptr);

// --- discriminator --------------------------------------------------------

// The exposed sub-terms of one discriminator evaluation.
struct DiscTerms {
  double reward = 0.0;
  double value_s = 0.0;
  double value_s_next = 0.0;
  double log_pi = 0.0;
  double f = 0.0;      // reward + gamma*value_s_next - value_s (pre-clamp)
  double logit = 0.0;  // clamp(f - log_pi)
};

double disc_logit(const StructuredDiscriminator& disc, const GaussianPolicy& policy,
                  const VectorXd& s, const VectorXd& a, const VectorXd& s_next,
                  double logit_clamp = kDefaultLogitClamp, DiscTerms* terms = nullptr);
double disc_prob(const StructuredDiscriminator& disc, const GaussianPolicy& policy,
                 const VectorXd& s, const VectorXd& a, const VectorXd& s_next,
                 double logit_clamp = kDefaultLogitClamp);
VectorXd disc_prob_batch(const StructuredDiscriminator& disc, const GaussianPolicy& policy,
                         const TransitionBatch& batch, double logit_clamp = kDefaultLogitClamp);

double sigmoid(double x);
double softplus(double x);

// --- adversarial updates --------------------------------------------------

struct DiscAdam {
  numcore::AdamState reward;
  numcore::AdamState value;
};

struct PolicyAdam {
  numcore::AdamState mean;
  numcore::AdamVecState log_std;
};

DiscAdam make_disc_adam(const AirlModel& model, double lr);
PolicyAdam make_policy_adam(const AirlModel& model, double lr);

struct DiscUpdateResult {
  double loss = 0.0;      // pre-step mean binary cross-entropy
  double accuracy = 0.0;  // fraction of correctly separated samples
};

// Loss, separation accuracy, and parameter gradients without stepping;
// exposed so the gradients can be verified by finite differences.
struct DiscGrads {
  double loss = 0.0;
  double accuracy = 0.0;
  numcore::MlpGrads reward;
  numcore::MlpGrads value;
};

// The raw logits feed the loss directly: softplus keeps the arithmetic stable
// at any magnitude, and the clamp only applies where probabilities are
// materialized (disc_prob and scoring).
DiscGrads disc_loss_and_grads(const AirlModel& model, const TransitionBatch& expert,
                              const TransitionBatch& generated);

// One Adam step on reward and value nets; labels expert -> 1, generated -> 0;
// the policy is held fixed.
DiscUpdateResult disc_update(AirlModel& model, const TransitionBatch& expert,
                             const TransitionBatch& generated, DiscAdam& adam);
double disc_update(AirlModel& model, std::span<const Transition> expert,
                   std::span<const Transition> generated, DiscAdam& adam);

// One-step proxy dynamics anchored at real states: a ~ pi(.|s), s' := a.
// Generated transitions carry trajectory_id -1.
std::vector<Transition> sample_generated(const AirlModel& model,
                                         std::span<const signalio::FeatureVec> expert_states,
                                         SplitMix64& rng);
TransitionBatch sample_generated_batch(const AirlModel& model, const MatrixXd& states,
                                       SplitMix64& rng, MatrixXd* eps_out = nullptr);

// Objective and policy-parameter gradients of
//   J = E[ r(s,a~) + gamma*V(a~) - V(s) - log pi(a~|s) ],  a~ = mean(s) + sigma.*eps,
// with the given frozen noise draw. Exposed so the gradient can be verified
// by finite differences.
struct PolicyObjective {
  double objective = 0.0;
  numcore::MlpGrads mean_grads;
  VectorXd log_std_grad;
};

PolicyObjective policy_objective(const AirlModel& model, const MatrixXd& states,
                                 const MatrixXd& eps);

// One Adam ascent step on mean_net and log_std; r and V frozen; log_std
// re-clamped after the step. Returns the pre-step objective.
double policy_update(AirlModel& model, const MatrixXd& states, SplitMix64& rng, PolicyAdam& adam);

// --- training -------------------------------------------------------------

AirlModel train_airl(const TransitionSet& expert, const TrainConfig& cfg,
                     const signalio::Normalizer& normalizer,
                     const signalio::FeatureConfig& feature);

// --- persistence ----------------------------------------------------------

// Versioned JSON document; load(save(m)) reproduces disc_prob bit for bit.
void save_model(const AirlModel& model, const std::string& path,
                const std::string& config_digest = "");
AirlModel load_model(const std::string& path);

}  // namespace airlfd::airlcore
