#include "airlfd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "airlfd/airlcore.hpp"  // sigmoid, softplus
#include "airlfd/rng.hpp"

namespace airlfd::baselines {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kEulerGamma = 0.5772156649;

MatrixXd to_matrix(const std::vector<FeatureVec>& windows) {
  if (windows.empty()) fail(ErrorCode::InsufficientData, "no windows");
  const Eigen::Index d = windows[0].size();
  MatrixXd all(d, static_cast<Eigen::Index>(windows.size()));
  for (std::size_t k = 0; k < windows.size(); ++k) {
    if (windows[k].size() != d) fail(ErrorCode::DimMismatch, "window dims differ");
    all.col(static_cast<Eigen::Index>(k)) = windows[k];
  }
  return all;
}

struct TreeBuilder {
  const MatrixXd& data;  // d x N
  SplitMix64& rng;
  int height_limit;
  IsoTree tree;

  int grow(std::vector<Eigen::Index>& idx, std::size_t begin, std::size_t end, int depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const std::size_t count = end - begin;
    if (depth >= height_limit || count <= 1) {
      tree.nodes[static_cast<std::size_t>(node_id)].size = static_cast<int>(count);
      return node_id;
    }

    // Candidate attributes: those not constant over this node's samples.
    const Eigen::Index d = data.rows();
    std::vector<Eigen::Index> candidates;
    std::vector<std::pair<double, double>> ranges;
    for (Eigen::Index f = 0; f < d; ++f) {
      double lo = data(f, idx[begin]), hi = lo;
      for (std::size_t k = begin + 1; k < end; ++k) {
        const double x = data(f, idx[k]);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      if (hi > lo) {
        candidates.push_back(f);
        ranges.emplace_back(lo, hi);
      }
    }
    if (candidates.empty()) {
      tree.nodes[static_cast<std::size_t>(node_id)].size = static_cast<int>(count);
      return node_id;
    }

    const std::size_t pick = static_cast<std::size_t>(rng.below(candidates.size()));
    const Eigen::Index feature = candidates[pick];
    const double split = rng.uniform(ranges[pick].first, ranges[pick].second);

    auto mid_it = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                 idx.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](Eigen::Index col) { return data(feature, col) < split; });
    const std::size_t mid = static_cast<std::size_t>(mid_it - idx.begin());
    if (mid == begin || mid == end) {  // degenerate draw at the range edge
      tree.nodes[static_cast<std::size_t>(node_id)].size = static_cast<int>(count);
      return node_id;
    }

    tree.nodes[static_cast<std::size_t>(node_id)].feature = static_cast<int>(feature);
    tree.nodes[static_cast<std::size_t>(node_id)].split = split;
    const int left = grow(idx, begin, mid, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_id)].left = left;
    const int right = grow(idx, mid, end, depth + 1);
    tree.nodes[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
  }
};

// Shared by the AE and the static GAN: deterministic reshuffled minibatches.
struct ColumnSampler {
  ColumnSampler(Eigen::Index n, int batch, SplitMix64& rng) : batch_(batch), rng_(rng) {
    perm_.resize(static_cast<std::size_t>(n));
    std::iota(perm_.begin(), perm_.end(), Eigen::Index{0});
    pos_ = perm_.size();
  }

  MatrixXd next(const MatrixXd& all) {
    MatrixXd out(all.rows(), batch_);
    for (int k = 0; k < batch_; ++k) {
      if (pos_ >= perm_.size()) {
        airlfd::shuffle(perm_, rng_);
        pos_ = 0;
      }
      out.col(k) = all.col(perm_[pos_++]);
    }
    return out;
  }

  int batch_;
  SplitMix64& rng_;
  std::vector<Eigen::Index> perm_;
  std::size_t pos_ = 0;
};

// Lexicographic column order, so a fit cannot depend on how the caller
// happened to order the training set.
MatrixXd canonical_columns(MatrixXd all) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(all.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index r = 0; r < all.rows(); ++r)
      if (all(r, a) != all(r, b)) return all(r, a) < all(r, b);
    return false;
  });
  MatrixXd sorted(all.rows(), all.cols());
  for (Eigen::Index k = 0; k < all.cols(); ++k)
    sorted.col(k) = all.col(order[static_cast<std::size_t>(k)]);
  return sorted;
}

MatrixXd draw_noise(Eigen::Index rows, Eigen::Index cols, SplitMix64& rng) {
  MatrixXd z(rows, cols);
  for (Eigen::Index b = 0; b < cols; ++b)
    for (Eigen::Index j = 0; j < rows; ++j) z(j, b) = rng.gaussian();
  return z;
}

}  // namespace

double iforest_cfactor(int n) {
  if (n <= 1) return 0.0;
  const double dn = static_cast<double>(n);
  return 2.0 * (std::log(dn - 1.0) + kEulerGamma) - 2.0 * (dn - 1.0) / dn;
}

IsoForest iforest_fit(const std::vector<FeatureVec>& windows, int psi, int n_trees,
                      std::uint64_t seed) {
  if (psi < 2) fail(ErrorCode::BadConfig, "iforest: psi must be >= 2");
  if (n_trees < 1) fail(ErrorCode::BadConfig, "iforest: n_trees must be >= 1");
  if (windows.size() < static_cast<std::size_t>(psi))
    fail(ErrorCode::InsufficientData, "iforest: " + std::to_string(windows.size()) +
                                          " windows < psi " + std::to_string(psi));
  const MatrixXd all = to_matrix(windows);
  const Eigen::Index n = all.cols();

  IsoForest forest;
  forest.psi = psi;
  forest.height_limit = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));
  forest.trees.reserve(static_cast<std::size_t>(n_trees));

  for (int t = 0; t < n_trees; ++t) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(t));
    // psi-subsample without replacement (partial Fisher-Yates).
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (int k = 0; k < psi; ++k) {
      const std::size_t j =
          static_cast<std::size_t>(k) +
          static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - k)));
      std::swap(idx[static_cast<std::size_t>(k)], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(psi));

    TreeBuilder builder{all, rng, forest.height_limit, {}};
    builder.grow(idx, 0, idx.size(), 0);
    forest.trees.push_back(std::move(builder.tree));
  }
  return forest;
}

double iforest_path_length(const IsoForest& forest, const FeatureVec& window) {
  if (forest.trees.empty()) fail(ErrorCode::InsufficientData, "iforest: empty forest");
  double total = 0.0;
  for (const IsoTree& tree : forest.trees) {
    int node = 0;
    int depth = 0;
    while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
      const IsoNode& cur = tree.nodes[static_cast<std::size_t>(node)];
      node = window(cur.feature) < cur.split ? cur.left : cur.right;
      ++depth;
    }
    total += depth + iforest_cfactor(tree.nodes[static_cast<std::size_t>(node)].size);
  }
  return total / static_cast<double>(forest.trees.size());
}

double iforest_score(const IsoForest& forest, const FeatureVec& window) {
  return std::exp2(-iforest_path_length(forest, window) / iforest_cfactor(forest.psi));
}

WindowAE ae_fit(const std::vector<FeatureVec>& windows, const AeConfig& cfg) {
  if (windows.empty()) fail(ErrorCode::InsufficientData, "ae_fit: no windows");
  if (cfg.steps < 1 || cfg.batch_size < 1 || cfg.hidden < 1 || cfg.latent < 1 || cfg.lr <= 0.0)
    fail(ErrorCode::BadConfig, "ae_fit: bad config");
  const MatrixXd all = canonical_columns(to_matrix(windows));
  const int d = static_cast<int>(all.rows());

  WindowAE ae;
  // Encoder keeps tanh on its output so the latent code is bounded.
  std::vector<numcore::LayerSpec> enc_specs{
      {d, cfg.hidden, numcore::Activation::Tanh},
      {cfg.hidden, cfg.latent, numcore::Activation::Tanh}};
  ae.encoder = numcore::init_mlp(enc_specs, substream(cfg.seed, 1).state_);
  ae.decoder = numcore::init_mlp(numcore::mlp_chain({cfg.latent, cfg.hidden, d}),
                                 substream(cfg.seed, 2).state_);

  numcore::AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  numcore::AdamState enc_adam = numcore::make_adam(ae.encoder, adam_cfg);
  numcore::AdamState dec_adam = numcore::make_adam(ae.decoder, adam_cfg);
  SplitMix64 rng = substream(cfg.seed, 3);
  ColumnSampler sampler(all.cols(), std::min<int>(cfg.batch_size, static_cast<int>(all.cols())),
                        rng);

  for (int step = 0; step < cfg.steps; ++step) {
    const MatrixXd x = sampler.next(all);
    numcore::ForwardCache enc_cache, dec_cache;
    const MatrixXd code = numcore::forward(ae.encoder, x, &enc_cache);
    const MatrixXd recon = numcore::forward(ae.decoder, code, &dec_cache);
    const MatrixXd dy = 2.0 * (recon - x) / static_cast<double>(x.size());
    auto [dec_grads, d_code] = numcore::backward(ae.decoder, dec_cache, dy);
    auto [enc_grads, d_in] = numcore::backward(ae.encoder, enc_cache, d_code);
    numcore::adam_step(ae.decoder, dec_grads, dec_adam);
    numcore::adam_step(ae.encoder, enc_grads, enc_adam);
  }
  if (!numcore::all_finite(ae.encoder) || !numcore::all_finite(ae.decoder))
    fail(ErrorCode::NumericFailure, "ae_fit diverged");
  return ae;
}

double ae_score(const WindowAE& ae, const FeatureVec& window) {
  const VectorXd recon = numcore::forward(ae.decoder, numcore::forward(ae.encoder, window));
  return (recon - window).squaredNorm() / static_cast<double>(window.size());
}

StaticDisc static_fit(const std::vector<FeatureVec>& windows, const StaticConfig& cfg) {
  if (windows.empty()) fail(ErrorCode::InsufficientData, "static_fit: no windows");
  if (cfg.steps < 1 || cfg.batch_size < 1 || cfg.hidden < 1 || cfg.noise_dim < 1 ||
      cfg.lr <= 0.0 || cfg.logit_clamp <= 0.0)
    fail(ErrorCode::BadConfig, "static_fit: bad config");
  const MatrixXd all = to_matrix(windows);
  const int d = static_cast<int>(all.rows());

  StaticDisc sd;
  sd.logit_clamp = cfg.logit_clamp;
  sd.disc = numcore::init_mlp(numcore::mlp_chain({d, cfg.hidden, 1}),
                              substream(cfg.seed, 1).state_);
  sd.generator = numcore::init_mlp(numcore::mlp_chain({cfg.noise_dim, cfg.hidden, d}),
                                   substream(cfg.seed, 2).state_);

  numcore::AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  numcore::AdamState disc_adam = numcore::make_adam(sd.disc, adam_cfg);
  numcore::AdamState gen_adam = numcore::make_adam(sd.generator, adam_cfg);
  SplitMix64 shuffle_rng = substream(cfg.seed, 3);
  SplitMix64 noise_rng = substream(cfg.seed, 4);
  const int batch = std::min<int>(cfg.batch_size, static_cast<int>(all.cols()));
  ColumnSampler sampler(all.cols(), batch, shuffle_rng);

  for (int step = 0; step < cfg.steps; ++step) {
    {  // discriminator step: real -> 1, generated -> 0
      const MatrixXd real = sampler.next(all);
      const MatrixXd fake =
          numcore::forward(sd.generator, draw_noise(cfg.noise_dim, batch, noise_rng));
      MatrixXd x(d, 2 * batch);
      x.leftCols(batch) = real;
      x.rightCols(batch) = fake;
      numcore::ForwardCache cache;
      const MatrixXd logits = numcore::forward(sd.disc, x, &cache);
      MatrixXd g(1, 2 * batch);
      for (int k = 0; k < 2 * batch; ++k) {
        // raw logits, as in airlcore: the clamp only bounds reported scores
        const double p = airlcore::sigmoid(logits(0, k));
        g(0, k) = (k < batch ? p - 1.0 : p) / static_cast<double>(2 * batch);
      }
      auto [grads, dx] = numcore::backward(sd.disc, cache, g);
      numcore::adam_step(sd.disc, grads, disc_adam);
    }
    {  // generator step: maximize log D(G(z)) (non-saturating form)
      numcore::ForwardCache gen_cache, disc_cache;
      const MatrixXd fake = numcore::forward(
          sd.generator, draw_noise(cfg.noise_dim, batch, noise_rng), &gen_cache);
      const MatrixXd logits = numcore::forward(sd.disc, fake, &disc_cache);
      MatrixXd g(1, batch);
      for (int k = 0; k < batch; ++k)
        g(0, k) = -airlcore::sigmoid(-logits(0, k)) / static_cast<double>(batch);
      auto [disc_grads, d_fake] = numcore::backward(sd.disc, disc_cache, g);
      auto [gen_grads, d_z] = numcore::backward(sd.generator, gen_cache, d_fake);
      numcore::adam_step(sd.generator, gen_grads, gen_adam);
    }
  }
  if (!numcore::all_finite(sd.disc) || !numcore::all_finite(sd.generator))
    fail(ErrorCode::NumericFailure, "static_fit diverged");
  return sd;
}

double static_score(const StaticDisc& sd, const FeatureVec& window) {
  const double raw = numcore::forward(sd.disc, window)(0);
  const double logit = std::min(std::max(raw, -sd.logit_clamp), sd.logit_clamp);
  return 1.0 - airlcore::sigmoid(logit);
}

}  // namespace airlfd::baselines
