#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phrasemt/cvae.hpp"
#include "phrasemt/data.hpp"
#include "phrasemt/grounding.hpp"

namespace phrasemt::retr {

using data::Token;
using data::Tokens;

// Pluggable phrase embedding provider.
class PhraseEncoder {
 public:
  virtual ~PhraseEncoder() = default;
  virtual std::vector<float> encode(const Tokens& phrase) const = 0;
  virtual int dim() const = 0;
  virtual std::string id() const = 0;
};

// Frozen static embedding table: each vocabulary token gets a seeded
// N(0,1) vector derived from a hash of the token string; the phrase
// embedding is the mean over its tokens.  Out-of-vocabulary tokens use the
// <unk> vector.
class StaticPhraseEncoder : public PhraseEncoder {
 public:
  StaticPhraseEncoder(const data::Vocab& vocab, int dim, std::uint64_t seed);
  std::vector<float> encode(const Tokens& phrase) const override;
  int dim() const override { return dim_; }
  std::string id() const override;

  const std::vector<float>& token_vector(const Token& t) const;

 private:
  int dim_;
  std::uint64_t seed_;
  std::unordered_map<Token, std::vector<float>> table_;
};

// Precomputed contextual embeddings from file, one JSON object per line:
// {"phrase": "joined tokens", "embedding": [floats]}.
class FilePhraseEncoder : public PhraseEncoder {
 public:
  explicit FilePhraseEncoder(const std::string& path);
  std::vector<float> encode(const Tokens& phrase) const override;
  int dim() const override { return dim_; }
  std::string id() const override { return id_; }

 private:
  int dim_ = 0;
  std::string id_;
  std::unordered_map<std::string, std::vector<float>> table_;
};

// Cosine similarity; throws DomainError on a zero-norm embedding.
double relevance(const std::vector<float>& a, const std::vector<float>& b);

struct ScoredEntry {
  long index = 0;
  double score = 0.0;
};

struct RetrievalResult {
  std::vector<ScoredEntry> pairs;  // descending score, ties by index ascending
  bool truncated = false;          // K exceeded the index size
};

enum class RepKind { Guided, Raw };

// Immutable store of phrase/region pairs with cached phrase embeddings and
// cached phrase-guided representations; exact exhaustive top-K queries.
class RetrievalIndex {
 public:
  struct Entry {
    Tokens phrase;
    Token head;
    std::string source_id;
  };

  long size() const { return static_cast<long>(entries_.size()); }
  const Entry& entry(long i) const { return entries_[static_cast<std::size_t>(i)]; }
  const std::vector<float>& embedding(long i) const { return embeddings_[static_cast<std::size_t>(i)]; }
  const std::vector<float>& rep(long i) const { return reps_[static_cast<std::size_t>(i)]; }
  const std::vector<float>& feature(long i) const { return features_[static_cast<std::size_t>(i)]; }

  int emb_dim() const { return emb_dim_; }
  int rep_dim() const { return rep_dim_; }
  int feat_dim() const { return feat_dim_; }
  const std::string& encoder_id() const { return encoder_id_; }
  const std::string& checkpoint_id() const { return checkpoint_id_; }

  // Exact K best by relevance score; ties broken by entry index ascending.
  // K > size returns every entry with truncated=true (and a stderr warning).
  RetrievalResult topk(const std::vector<float>& query_embedding, long k,
                       const std::string& exclude_source_id = "") const;

  // u = (1/K) * sum_k RS_k * rep_k over the retrieved pairs (the cached s
  // for Guided, the raw region feature for Raw).  Weights are the raw
  // relevance scores; they are not normalized to sum to one.
  std::vector<float> universal_rep(const RetrievalResult& result, RepKind kind) const;

  // Mean over queries of the score at rank k (1-based).
  double ars(const std::vector<std::vector<float>>& query_embeddings, long k) const;

  void save(const std::string& path) const;
  static RetrievalIndex load(const std::string& path);

  // Build error when ids disagree with the expected configuration.
  void verify_provenance(const std::string& expected_encoder_id,
                         const std::string& expected_checkpoint_id) const;

  static RetrievalIndex build(const ground::PhraseSet& set, const PhraseEncoder& encoder,
                              const cvae::LatentModel<float>& latent, const data::Vocab& vocab,
                              const std::string& checkpoint_id,
                              cvae::RepMode mode = cvae::RepMode::PosteriorMean);

 private:
  std::vector<Entry> entries_;
  std::vector<std::vector<float>> embeddings_;
  std::vector<std::vector<float>> reps_;
  std::vector<std::vector<float>> features_;
  int emb_dim_ = 0, rep_dim_ = 0, feat_dim_ = 0;
  std::string encoder_id_, checkpoint_id_;
};

}  // namespace phrasemt::retr
