#include <cmath>
#include <fstream>

#include <json.hpp>

#include "phrasemt/errors.hpp"
#include "phrasemt/retrieval.hpp"
#include "phrasemt/rng.hpp"

namespace phrasemt::retr {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

StaticPhraseEncoder::StaticPhraseEncoder(const data::Vocab& vocab, int dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < 1) throw ConfigError("static encoder: dim must be >= 1");
  for (int id = 0; id < vocab.size(); ++id) {
    const Token& t = vocab.token(id);
    RngState rng(RngState::split_mix(fnv1a(t) ^ seed));
    std::vector<float> vec(static_cast<std::size_t>(dim));
    for (auto& x : vec) x = static_cast<float>(rng.normal());
    table_.emplace(t, std::move(vec));
  }
}

const std::vector<float>& StaticPhraseEncoder::token_vector(const Token& t) const {
  auto it = table_.find(t);
  if (it != table_.end()) return it->second;
  return table_.at(data::kUnkToken);
}

std::vector<float> StaticPhraseEncoder::encode(const Tokens& phrase) const {
  if (phrase.empty()) throw DomainError("encode_phrase: empty phrase");
  std::vector<double> acc(static_cast<std::size_t>(dim_), 0.0);
  for (const auto& t : phrase) {
    const auto& vec = token_vector(t);
    for (int i = 0; i < dim_; ++i) acc[static_cast<std::size_t>(i)] += vec[static_cast<std::size_t>(i)];
  }
  std::vector<float> out(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i)
    out[static_cast<std::size_t>(i)] =
        static_cast<float>(acc[static_cast<std::size_t>(i)] / static_cast<double>(phrase.size()));
  return out;
}

std::string StaticPhraseEncoder::id() const {
  return "static-d" + std::to_string(dim_) + "-s" + std::to_string(seed_);
}

FilePhraseEncoder::FilePhraseEncoder(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read embedding file: " + path);
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      auto phrase = j.at("phrase").get<std::string>();
      auto emb = j.at("embedding").get<std::vector<float>>();
      if (dim_ == 0) dim_ = static_cast<int>(emb.size());
      if (static_cast<int>(emb.size()) != dim_)
        throw ParseError("inconsistent embedding dimension");
      table_.emplace(std::move(phrase), std::move(emb));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (table_.empty()) throw ParseError("embedding file is empty: " + path);
  id_ = "file-d" + std::to_string(dim_) + "-n" + std::to_string(table_.size());
}

std::vector<float> FilePhraseEncoder::encode(const Tokens& phrase) const {
  if (phrase.empty()) throw DomainError("encode_phrase: empty phrase");
  auto it = table_.find(data::join(phrase));
  if (it == table_.end())
    throw DomainError("file encoder: no embedding for phrase '" + data::join(phrase) + "'");
  return it->second;
}

}  // namespace phrasemt::retr
