#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "phrasemt/data.hpp"

namespace phrasemt::ground {

using data::Token;
using data::Tokens;

enum class PosTag { Det, Adj, Noun, Verb, Prep, Punct, Other };

// Closed POS lexicon.  Unknown tokens tag as Other, so they never enter a
// noun phrase.
class PosLexicon {
 public:
  void add(const Token& t, PosTag tag) { tags_[t] = tag; }
  PosTag tag(const Token& t) const {
    auto it = tags_.find(t);
    return it == tags_.end() ? PosTag::Other : it->second;
  }
  static PosLexicon from_world(const data::SynthWorld& world);

 private:
  std::unordered_map<Token, PosTag> tags_;
};

struct PhraseSpan {
  int start = 0;
  int len = 0;
  bool operator==(const PhraseSpan&) const = default;
};

// <noun phrase, image region> pair: one entry of the phrase-level store.
struct PhraseRegionPair {
  Tokens phrase;
  std::vector<float> feature;
  Token head;
  std::string source_id;
};

using PhraseSet = std::vector<PhraseRegionPair>;

// Greedy left-to-right maximal matches of DET? ADJ* NOUN+; non-overlapping
// and sorted by construction.
std::vector<PhraseSpan> chunk_noun_phrases(const Tokens& tokens, const PosLexicon& lexicon);

// Final noun of the phrase.
Token head_of(const Tokens& phrase, const PosLexicon& lexicon);

enum class GroundingPolicy { Skip, Fail };

// Where phrase spans come from: the built-in chunker, or the sentence's own
// region annotations (for corpora with precomputed phrase spans).
enum class SpanSource { Chunker, Regions };

struct GroundingOptions {
  GroundingPolicy policy = GroundingPolicy::Skip;
  SpanSource spans = SpanSource::Chunker;
};

// Builds the phrase-level image set: for every sentence, every noun phrase
// whose span exactly matches a region annotation yields one pair, in corpus
// order.  Unresolvable phrases are skipped or fail per policy.
PhraseSet build_phrase_image_set(const data::Corpus& corpus, const PosLexicon& lexicon,
                                 const GroundingOptions& options = {});

// JSONL: {"phrase": [tokens], "head", "feat": [floats], "source_id"}
void save_phrase_set(const PhraseSet& set, const std::string& path);
PhraseSet load_phrase_set(const std::string& path);

}  // namespace phrasemt::ground
