#include "phrasemt/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace phrasemt::retr {

double relevance(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) throw ShapeError("relevance: embedding dims differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("relevance: zero-norm embedding");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

RetrievalResult RetrievalIndex::topk(const std::vector<float>& query_embedding, long k,
                                     const std::string& exclude_source_id) const {
  if (k < 1) throw DomainError("topk: K must be >= 1");
  if (size() == 0) throw DomainError("topk: empty index");
  std::vector<ScoredEntry> scored;
  scored.reserve(static_cast<std::size_t>(size()));
  for (long i = 0; i < size(); ++i) {
    if (!exclude_source_id.empty() && entries_[static_cast<std::size_t>(i)].source_id == exclude_source_id)
      continue;
    scored.push_back(ScoredEntry{i, relevance(query_embedding, embeddings_[static_cast<std::size_t>(i)])});
  }
  if (scored.empty()) throw DomainError("topk: exclusion removed every entry");
  RetrievalResult res;
  if (k > static_cast<long>(scored.size())) {
    std::cerr << "[phrasemt] warning: K=" << k << " exceeds index size " << scored.size()
              << "; returning all entries\n";
    res.truncated = true;
    k = static_cast<long>(scored.size());
  }
  auto better = [](const ScoredEntry& a, const ScoredEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  };
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);
  res.pairs.assign(scored.begin(), scored.begin() + k);
  return res;
}

std::vector<float> RetrievalIndex::universal_rep(const RetrievalResult& result, RepKind kind) const {
  if (result.pairs.empty()) throw DomainError("universal_rep: empty retrieval result");
  const int dim = kind == RepKind::Guided ? rep_dim_ : feat_dim_;
  std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
  for (const auto& se : result.pairs) {
    const auto& r = kind == RepKind::Guided ? reps_[static_cast<std::size_t>(se.index)]
                                            : features_[static_cast<std::size_t>(se.index)];
    for (int i = 0; i < dim; ++i) acc[static_cast<std::size_t>(i)] += se.score * r[static_cast<std::size_t>(i)];
  }
  const double inv_k = 1.0 / static_cast<double>(result.pairs.size());
  std::vector<float> u(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i)
    u[static_cast<std::size_t>(i)] = static_cast<float>(acc[static_cast<std::size_t>(i)] * inv_k);
  return u;
}

double RetrievalIndex::ars(const std::vector<std::vector<float>>& query_embeddings, long k) const {
  if (query_embeddings.empty()) throw DomainError("ars: empty query set");
  if (k < 1 || k > size()) throw DomainError("ars: k out of range");
  double sum = 0.0;
  for (const auto& q : query_embeddings) {
    const RetrievalResult res = topk(q, k);
    sum += res.pairs[static_cast<std::size_t>(k - 1)].score;
  }
  return sum / static_cast<double>(query_embeddings.size());
}

namespace {
constexpr char kIndexMagic[8] = {'P', 'M', 'T', 'I', 'N', 'D', 'X', '1'};

void write_block(std::ofstream& os, const std::vector<std::vector<float>>& rows) {
  for (const auto& r : rows)
    os.write(reinterpret_cast<const char*>(r.data()),
             static_cast<std::streamsize>(r.size() * sizeof(float)));
}

void read_block(std::ifstream& is, std::vector<std::vector<float>>& rows, long n, int dim) {
  rows.resize(static_cast<std::size_t>(n));
  for (auto& r : rows) {
    r.resize(static_cast<std::size_t>(dim));
    is.read(reinterpret_cast<char*>(r.data()), static_cast<std::streamsize>(dim * sizeof(float)));
  }
}
}  // namespace

void RetrievalIndex::save(const std::string& path) const {
  nlohmann::ordered_json header;
  header["format_version"] = 1;
  header["count"] = size();
  header["emb_dim"] = emb_dim_;
  header["rep_dim"] = rep_dim_;
  header["feat_dim"] = feat_dim_;
  header["encoder_id"] = encoder_id_;
  header["checkpoint_id"] = checkpoint_id_;
  const std::string hs = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write index: " + path);
  os.write(kIndexMagic, sizeof(kIndexMagic));
  const std::uint64_t hlen = hs.size();
  os.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  write_block(os, embeddings_);
  write_block(os, reps_);
  write_block(os, features_);
  for (const auto& e : entries_) {
    nlohmann::ordered_json j;
    j["phrase"] = e.phrase;
    j["head"] = e.head;
    j["source_id"] = e.source_id;
    os << j.dump() << "\n";
  }
  if (!os) throw IoError("index write failed: " + path);
}

RetrievalIndex RetrievalIndex::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read index: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kIndexMagic, sizeof(kIndexMagic)) != 0)
    throw ParseError("not an index file: " + path);
  std::uint64_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hs(hlen, '\0');
  is.read(hs.data(), static_cast<std::streamsize>(hlen));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(hs);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad index header: ") + e.what());
  }
  RetrievalIndex idx;
  const long n = header.at("count").get<long>();
  idx.emb_dim_ = header.at("emb_dim").get<int>();
  idx.rep_dim_ = header.at("rep_dim").get<int>();
  idx.feat_dim_ = header.at("feat_dim").get<int>();
  idx.encoder_id_ = header.at("encoder_id").get<std::string>();
  idx.checkpoint_id_ = header.at("checkpoint_id").get<std::string>();
  read_block(is, idx.embeddings_, n, idx.emb_dim_);
  read_block(is, idx.reps_, n, idx.rep_dim_);
  read_block(is, idx.features_, n, idx.feat_dim_);
  if (!is) throw ParseError("index truncated: " + path);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      Entry e;
      e.phrase = j.at("phrase").get<Tokens>();
      e.head = j.at("head").get<Token>();
      e.source_id = j.at("source_id").get<std::string>();
      idx.entries_.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": bad entry metadata: " + e.what());
    }
  }
  if (static_cast<long>(idx.entries_.size()) != n)
    throw ParseError("index entry count mismatch: " + path);
  return idx;
}

void RetrievalIndex::verify_provenance(const std::string& expected_encoder_id,
                                       const std::string& expected_checkpoint_id) const {
  if (!expected_encoder_id.empty() && expected_encoder_id != encoder_id_)
    throw ConfigError("index was built with encoder '" + encoder_id_ + "', expected '" +
                      expected_encoder_id + "'");
  if (!expected_checkpoint_id.empty() && expected_checkpoint_id != checkpoint_id_)
    throw ConfigError("index was built from checkpoint '" + checkpoint_id_ + "', expected '" +
                      expected_checkpoint_id + "'");
}

RetrievalIndex RetrievalIndex::build(const ground::PhraseSet& set, const PhraseEncoder& encoder,
                                     const cvae::LatentModel<float>& latent,
                                     const data::Vocab& vocab, const std::string& checkpoint_id,
                                     cvae::RepMode mode) {
  RetrievalIndex idx;
  idx.emb_dim_ = encoder.dim();
  idx.rep_dim_ = latent.config().rnn_hidden;
  idx.feat_dim_ = latent.config().feat_dim;
  idx.encoder_id_ = encoder.id();
  idx.checkpoint_id_ = checkpoint_id;
  for (const auto& pair : set) {
    if (static_cast<int>(pair.feature.size()) != idx.feat_dim_)
      throw ConfigError("build_index: feature dim " + std::to_string(pair.feature.size()) +
                        " does not match latent model feat_dim " + std::to_string(idx.feat_dim_));
    Entry e;
    e.phrase = pair.phrase;
    e.head = pair.head;
    e.source_id = pair.source_id;
    idx.entries_.push_back(std::move(e));
    std::vector<float> emb = encoder.encode(pair.phrase);
    double norm = 0.0;
    for (float x : emb) norm += static_cast<double>(x) * x;
    if (norm == 0.0) throw DomainError("build_index: zero-norm embedding for phrase '" +
                                       data::join(pair.phrase) + "'");
    idx.embeddings_.push_back(std::move(emb));
    idx.reps_.push_back(latent.infer_rep(vocab.ids(pair.phrase),
                                         cvae::LatentModel<float>::widen(pair.feature), mode));
    idx.features_.push_back(pair.feature);
  }
  return idx;
}

}  // namespace phrasemt::retr
