#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "phrasemt/data.hpp"
#include "phrasemt/gradcheck.hpp"
#include "phrasemt/graph.hpp"
#include "phrasemt/layers.hpp"
#include "phrasemt/optim.hpp"

namespace phrasemt::cvae {

// One training/inference item: phrase token ids plus the region feature.
struct EncodedPair {
  std::vector<int> phrase_ids;
  std::vector<float> feature;
};

struct CvaeTrainConfig {
  // full-scale defaults; desk_scale() shrinks them for laptop runs
  long batch_size = 1024;
  double learning_rate = 5e-5;
  int epochs = 200;
  long anneal_steps = 20000;
  double word_dropout = 0.1;
  std::uint64_t seed = 1;

  static CvaeTrainConfig desk_scale() {
    CvaeTrainConfig c;
    c.batch_size = 64;
    c.learning_rate = 1e-3;
    c.epochs = 30;
    c.anneal_steps = 1200;
    c.word_dropout = 0.1;
    return c;
  }
};

struct EpochLog {
  int epoch = 0;
  double recon = 0.0;          // per-token reconstruction NLL
  double kl_per_pair = 0.0;    // nats per pair
  double anneal_weight = 0.0;  // at the last step of the epoch
};

template <typename T>
struct Gaussian {
  std::vector<T> mu;
  std::vector<T> sigma;
};

struct ElboOut {
  double total = 0.0;          // recon + anneal_weight * kl (both per token)
  double recon = 0.0;          // per-token NLL
  double kl = 0.0;             // per-token KL (so total == recon + w * kl)
  double kl_per_pair = 0.0;    // for the posterior-collapse sentinel
  double anneal_weight = 0.0;
  long tokens = 0;
};

// Linear KL annealing ramp, clamped to [0, 1].
inline double anneal_weight(long step, long anneal_steps) {
  if (step < 0) step = 0;
  if (anneal_steps < 1) throw ConfigError("anneal_steps must be >= 1");
  return std::min(1.0, static_cast<double>(step) / static_cast<double>(anneal_steps));
}

// Closed-form KL between diagonal Gaussians q and p, summed over dims.
template <typename T>
double kl_diag_gaussians(const std::vector<T>& mu_q, const std::vector<T>& sigma_q,
                         const std::vector<T>& mu_p, const std::vector<T>& sigma_p) {
  if (mu_q.size() != sigma_q.size() || mu_q.size() != mu_p.size() || mu_q.size() != sigma_p.size())
    throw ShapeError("kl: dimension mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < mu_q.size(); ++i) {
    const double sq = static_cast<double>(sigma_q[i]);
    const double sp = static_cast<double>(sigma_p[i]);
    if (!(sq > 0.0) || !(sp > 0.0)) throw DomainError("kl: sigmas must be positive");
    const double d = static_cast<double>(mu_q[i]) - static_cast<double>(mu_p[i]);
    kl += std::log(sp / sq) + (sq * sq + d * d) / (2.0 * sp * sp) - 0.5;
  }
  return kl;
}

// z = mu + sigma . eps, eps ~ N(0, I).
template <typename T>
std::vector<T> reparameterize(const std::vector<T>& mu, const std::vector<T>& sigma,
                              RngState& rng) {
  if (mu.size() != sigma.size()) throw ShapeError("reparameterize: dimension mismatch");
  std::vector<T> z(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    z[i] = mu[i] + sigma[i] * static_cast<T>(rng.normal());
  return z;
}

enum class RepMode { PosteriorMean, PriorMean };

// Conditional VAE over (phrase, region feature): Gaussian prior from the
// feature, Gaussian posterior from [phrase RNN state, feature], GRU decoder
// reconstructing the phrase from the initial state s = Linear([z, v]).
// The raw linear sigma outputs pass through softplus to stay positive.
template <typename T>
class LatentModel {
 public:
  struct Config {
    int vocab_size = 0;
    int feat_dim = 64;
    int latent_dim = 64;   // full-scale default
    int rnn_hidden = 512;  // full-scale default; also the width of s
    int emb_dim = 256;
    std::uint64_t init_seed = 0;

    static Config desk_scale(int vocab_size) {
      Config c;
      c.vocab_size = vocab_size;
      c.feat_dim = 64;
      c.latent_dim = 16;
      c.rnn_hidden = 64;
      c.emb_dim = 32;
      return c;
    }
  };

  explicit LatentModel(const Config& cfg) : cfg_(cfg) {
    if (cfg.vocab_size <= data::kNumReserved) throw ConfigError("cvae: vocab too small");
    RngState rng(cfg.init_seed);
    emb_ = &params_.create_embedding("emb", cfg.vocab_size, cfg.emb_dim, rng);
    enc_ = nn::GruCell<T>::create(params_, "enc", cfg.emb_dim, cfg.rnn_hidden, rng);
    mu_q_ = nn::Linear<T>::create(params_, "mu_q", cfg.rnn_hidden + cfg.feat_dim, cfg.latent_dim, rng);
    sigma_q_ = nn::Linear<T>::create(params_, "sigma_q", cfg.rnn_hidden + cfg.feat_dim,
                                     cfg.latent_dim, rng);
    mu_p_ = nn::Linear<T>::create(params_, "mu_p", cfg.feat_dim, cfg.latent_dim, rng);
    sigma_p_ = nn::Linear<T>::create(params_, "sigma_p", cfg.feat_dim, cfg.latent_dim, rng);
    init_ = nn::Linear<T>::create(params_, "init", cfg.latent_dim + cfg.feat_dim, cfg.rnn_hidden, rng);
    dec_ = nn::GruCell<T>::create(params_, "dec", cfg.emb_dim, cfg.rnn_hidden, rng);
    out_ = nn::Linear<T>::create(params_, "out", cfg.rnn_hidden, cfg.vocab_size, rng);
  }

  const Config& config() const { return cfg_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }

  // ---- inference ops (pure; fresh forward-only graph per call) ----

  Gaussian<T> prior(const std::vector<T>& v) const {
    check_feat(v);
    nn::Graph<T> g;
    auto& self = const_cast<LatentModel&>(*this);
    nn::NodeId vid = g.leaf(Tensor<T>::row(v));
    nn::NodeId mu = self.mu_p_.forward(g, vid);
    nn::NodeId sg = g.softplus(self.sigma_p_.forward(g, vid));
    return {g.val(mu).data, g.val(sg).data};
  }

  Gaussian<T> posterior(const std::vector<int>& phrase_ids, const std::vector<T>& v) const {
    check_feat(v);
    if (phrase_ids.empty()) throw DomainError("posterior: empty phrase");
    nn::Graph<T> g;
    auto& self = const_cast<LatentModel&>(*this);
    nn::NodeId hv = self.posterior_features(g, phrase_ids, v);
    nn::NodeId mu = self.mu_q_.forward(g, hv);
    nn::NodeId sg = g.softplus(self.sigma_q_.forward(g, hv));
    return {g.val(mu).data, g.val(sg).data};
  }

  std::vector<T> decode_init(const std::vector<T>& z, const std::vector<T>& v) const {
    check_feat(v);
    if (static_cast<int>(z.size()) != cfg_.latent_dim)
      throw ShapeError("decode_init: latent dim mismatch");
    nn::Graph<T> g;
    auto& self = const_cast<LatentModel&>(*this);
    nn::NodeId zin = g.concat_cols({g.leaf(Tensor<T>::row(z)), g.leaf(Tensor<T>::row(v))});
    return g.val(self.init_.forward(g, zin)).data;
  }

  // Phrase-guided representation: s from the posterior (or prior) mean.
  // Deterministic; no sampling.
  std::vector<T> infer_rep(const std::vector<int>& phrase_ids, const std::vector<T>& v,
                           RepMode mode = RepMode::PosteriorMean) const {
    const Gaussian<T> gz =
        mode == RepMode::PosteriorMean ? posterior(phrase_ids, v) : prior(v);
    return decode_init(gz.mu, v);
  }

  // Decoder inputs for teacher forcing: BOS then the phrase tokens, each
  // independently replaced by UNK with probability word_dropout.
  static std::vector<int> word_dropout_inputs(const std::vector<int>& phrase_ids,
                                              double word_dropout, RngState& rng) {
    std::vector<int> in;
    in.reserve(phrase_ids.size() + 1);
    in.push_back(data::kBosId);
    for (int id : phrase_ids) in.push_back(id);
    if (word_dropout > 0.0)
      for (auto& id : in)
        if (rng.uniform() < word_dropout) id = data::kUnkId;
    return in;
  }

  // Teacher-forced per-token reconstruction NLL of the phrase given initial
  // decoder state s.
  double reconstruction_loss(const std::vector<T>& s, const std::vector<int>& phrase_ids,
                             double word_dropout, RngState& rng) const {
    if (phrase_ids.empty()) throw DomainError("reconstruction_loss: empty phrase");
    if (static_cast<int>(s.size()) != cfg_.rnn_hidden)
      throw ShapeError("reconstruction_loss: bad s width");
    nn::Graph<T> g;
    auto& self = const_cast<LatentModel&>(*this);
    const std::vector<int> in = word_dropout_inputs(phrase_ids, word_dropout, rng);
    nn::NodeId loss = self.decoder_nll(g, g.leaf(Tensor<T>::row(s)), in, targets_of(phrase_ids),
                                       nn::Graph<T>::Reduction::Mean);
    return static_cast<double>(g.val(loss).at(0));
  }

  // ---- training ----

  // Annealed ELBO over a batch.  Both returned loss components are
  // normalized per target token so total == recon + w * kl holds exactly;
  // kl_per_pair is reported alongside for the collapse sentinel.
  ElboOut elbo_loss(const std::vector<EncodedPair>& batch, long step,
                    const CvaeTrainConfig& cfg, RngState& rng, bool with_grad) {
    if (batch.empty()) throw DomainError("elbo_loss: empty batch");
    if (step < 1) throw DomainError("elbo_loss: step must be >= 1");
    const double w = anneal_weight(step, cfg.anneal_steps);
    nn::Graph<T> g;
    std::vector<nn::NodeId> recon_terms, kl_terms;
    long tokens = 0;
    for (const auto& pair : batch) {
      if (pair.phrase_ids.empty()) throw DomainError("elbo_loss: empty phrase in batch");
      auto [recon, kl, ntok] = pair_losses(g, pair, cfg.word_dropout, rng);
      recon_terms.push_back(recon);
      kl_terms.push_back(kl);
      tokens += ntok;
    }
    nn::NodeId recon_sum = sum_scalars(g, recon_terms);
    nn::NodeId kl_sum = sum_scalars(g, kl_terms);
    const T inv_tok = T(1) / static_cast<T>(tokens);
    nn::NodeId total = g.add(g.scale(recon_sum, inv_tok),
                             g.scale(g.scale(kl_sum, static_cast<T>(w)), inv_tok));
    ElboOut out;
    out.anneal_weight = w;
    out.tokens = tokens;
    out.recon = static_cast<double>(g.val(recon_sum).at(0)) / tokens;
    out.kl = static_cast<double>(g.val(kl_sum).at(0)) / tokens;
    out.kl_per_pair = static_cast<double>(g.val(kl_sum).at(0)) / static_cast<double>(batch.size());
    out.total = static_cast<double>(g.val(total).at(0));
    if (with_grad) {
      g.backward(total);
      g.flush_param_grads();
    }
    return out;
  }

  // Adam training over shuffled minibatches; deterministic given cfg.seed.
  std::vector<EpochLog> train(const std::vector<EncodedPair>& pairs, const CvaeTrainConfig& cfg) {
    if (pairs.empty()) throw DomainError("train_cvae: empty phrase set");
    if (!(cfg.word_dropout >= 0.0 && cfg.word_dropout < 1.0))
      throw ConfigError("train_cvae: word_dropout must be in [0,1)");
    nn::Adam<T> adam(cfg.learning_rate);
    RngState rng(cfg.seed);
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<EpochLog> log;
    long step = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      rng.shuffle(order.begin(), order.end());
      double recon_sum = 0.0, kl_sum = 0.0, w_last = 0.0;
      long batches = 0;
      for (std::size_t off = 0; off < order.size(); off += cfg.batch_size) {
        std::vector<EncodedPair> batch;
        for (std::size_t i = off; i < std::min(order.size(), off + cfg.batch_size); ++i)
          batch.push_back(pairs[order[i]]);
        ++step;
        params_.zero_grads();
        ElboOut out = elbo_loss(batch, step, cfg, rng, /*with_grad=*/true);
        if (!std::isfinite(out.total))
          throw TrainError("train_cvae: non-finite loss at step " + std::to_string(step));
        adam.step(params_);
        recon_sum += out.recon;
        kl_sum += out.kl_per_pair;
        w_last = out.anneal_weight;
        ++batches;
      }
      log.push_back(EpochLog{epoch, recon_sum / batches, kl_sum / batches, w_last});
    }
    step_count_ = step;
    return log;
  }

  // Teacher-forced argmax accuracy of phrase reconstruction from the
  // posterior-mean representation (no word dropout).
  double reconstruction_accuracy(const std::vector<EncodedPair>& pairs) const {
    long correct = 0, total = 0;
    for (const auto& pair : pairs) {
      const std::vector<T> s = infer_rep(pair.phrase_ids, widen(pair.feature));
      const std::vector<int> pred = greedy_reconstruct(s, pair.phrase_ids);
      const std::vector<int> tgt = targets_of(pair.phrase_ids);
      for (std::size_t i = 0; i < tgt.size(); ++i) {
        correct += (pred[i] == tgt[i]) ? 1 : 0;
        ++total;
      }
    }
    return total ? static_cast<double>(correct) / total : 0.0;
  }

  double mean_kl(const std::vector<EncodedPair>& pairs) const {
    double sum = 0.0;
    for (const auto& pair : pairs) {
      const std::vector<T> v = widen(pair.feature);
      const Gaussian<T> q = posterior(pair.phrase_ids, v);
      const Gaussian<T> p = prior(v);
      sum += kl_diag_gaussians(q.mu, q.sigma, p.mu, p.sigma);
    }
    return pairs.empty() ? 0.0 : sum / static_cast<double>(pairs.size());
  }

  long step_count() const { return step_count_; }
  void set_step_count(long s) { step_count_ = s; }

  static std::vector<T> widen(const std::vector<float>& v) {
    return std::vector<T>(v.begin(), v.end());
  }

  static std::vector<int> targets_of(const std::vector<int>& phrase_ids) {
    std::vector<int> t = phrase_ids;
    t.push_back(data::kEosId);
    return t;
  }

 private:
  void check_feat(const std::vector<T>& v) const {
    if (static_cast<int>(v.size()) != cfg_.feat_dim)
      throw ShapeError("cvae: feature dim " + std::to_string(v.size()) + " != " +
                       std::to_string(cfg_.feat_dim));
  }

  // [1 x (hidden + feat)] from the phrase RNN final state and the feature.
  nn::NodeId posterior_features(nn::Graph<T>& g, const std::vector<int>& phrase_ids,
                                const std::vector<T>& v) {
    nn::NodeId emb = g.embedding(g.use(*emb_), phrase_ids);
    nn::NodeId h0 = g.leaf(Tensor<T>({1, cfg_.rnn_hidden}));
    nn::NodeId hT = enc_.encode(g, emb, h0);
    return g.concat_cols({hT, g.leaf(Tensor<T>::row(v))});
  }

  // Teacher-forced decoder NLL given initial state node.
  nn::NodeId decoder_nll(nn::Graph<T>& g, nn::NodeId s, const std::vector<int>& input_ids,
                         std::vector<int> target_ids, typename nn::Graph<T>::Reduction red) {
    nn::NodeId emb = g.embedding(g.use(*emb_), input_ids);
    nn::NodeId h = s;
    std::vector<nn::NodeId> states;
    states.reserve(input_ids.size());
    for (std::size_t t = 0; t < input_ids.size(); ++t) {
      h = dec_.step(g, g.slice_rows(emb, static_cast<long>(t), 1), h);
      states.push_back(h);
    }
    nn::NodeId logits = out_.forward(g, g.concat_rows(states));
    return g.cross_entropy_label_smoothed(logits, std::move(target_ids), T(0), red);
  }

  // (recon sum node, kl node, token count) for one pair.
  std::tuple<nn::NodeId, nn::NodeId, long> pair_losses(nn::Graph<T>& g, const EncodedPair& pair,
                                                       double word_dropout, RngState& rng) {
    const std::vector<T> v = widen(pair.feature);
    check_feat(v);
    nn::NodeId vid = g.leaf(Tensor<T>::row(v));
    nn::NodeId hv = posterior_features(g, pair.phrase_ids, v);
    nn::NodeId mu_q = mu_q_.forward(g, hv);
    nn::NodeId sigma_q = g.softplus(sigma_q_.forward(g, hv));
    nn::NodeId mu_p = mu_p_.forward(g, vid);
    nn::NodeId sigma_p = g.softplus(sigma_p_.forward(g, vid));

    // one-sample reparameterized z
    Tensor<T> eps({1, cfg_.latent_dim});
    for (auto& e : eps.data) e = static_cast<T>(rng.normal());
    nn::NodeId z = g.add(mu_q, g.mul_const(sigma_q, eps));
    nn::NodeId s = init_.forward(g, g.concat_cols({z, vid}));

    const std::vector<int> in = word_dropout_inputs(pair.phrase_ids, word_dropout, rng);
    const std::vector<int> tgt = targets_of(pair.phrase_ids);
    nn::NodeId recon = decoder_nll(g, s, in, tgt, nn::Graph<T>::Reduction::Sum);

    // closed-form diagonal KL, composed on the graph
    nn::NodeId diff = g.sub(mu_q, mu_p);
    nn::NodeId num = g.add(g.mul(sigma_q, sigma_q), g.mul(diff, diff));
    nn::NodeId frac = g.div(num, g.scale(g.mul(sigma_p, sigma_p), T(2)));
    nn::NodeId terms = g.add(g.sub(g.log_op(sigma_p), g.log_op(sigma_q)), frac);
    nn::NodeId kl = g.add_const(g.sum_all(terms),
                                Tensor<T>::scalar(static_cast<T>(-0.5 * cfg_.latent_dim)));
    return {recon, kl, static_cast<long>(tgt.size())};
  }

  std::vector<int> greedy_reconstruct(const std::vector<T>& s,
                                      const std::vector<int>& phrase_ids) const {
    nn::Graph<T> g;
    auto& self = const_cast<LatentModel&>(*this);
    std::vector<int> in;
    in.push_back(data::kBosId);
    for (int id : phrase_ids) in.push_back(id);
    nn::NodeId emb = g.embedding(g.use(*self.emb_), in);
    nn::NodeId h = g.leaf(Tensor<T>::row(s));
    std::vector<int> pred;
    for (std::size_t t = 0; t < in.size(); ++t) {
      h = self.dec_.step(g, g.slice_rows(emb, static_cast<long>(t), 1), h);
      const Tensor<T>& logits = g.val(self.out_.forward(g, h));
      int best = 0;
      for (long c = 1; c < logits.numel(); ++c)
        if (logits.at(c) > logits.at(best)) best = static_cast<int>(c);
      pred.push_back(best);
    }
    return pred;
  }

  static nn::NodeId sum_scalars(nn::Graph<T>& g, const std::vector<nn::NodeId>& xs) {
    return xs.size() == 1 ? xs[0] : g.sum_all(g.concat_cols(xs));
  }

  Config cfg_;
  ParamStore<T> params_;
  Parameter<T>* emb_ = nullptr;
  nn::GruCell<T> enc_, dec_;
  nn::Linear<T> mu_q_, sigma_q_, mu_p_, sigma_p_, init_, out_;
  long step_count_ = 0;
};

}  // namespace phrasemt::cvae
