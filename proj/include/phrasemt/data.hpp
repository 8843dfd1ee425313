#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "phrasemt/errors.hpp"
#include "phrasemt/rng.hpp"

namespace phrasemt::data {

using Token = std::string;
using Tokens = std::vector<Token>;

inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kBosToken = "<bos>";
inline constexpr const char* kEosToken = "<eos>";
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kMaskToken = "<mask>";

enum ReservedId : int { kPadId = 0, kBosId = 1, kEosId = 2, kUnkId = 3, kMaskId = 4 };
inline constexpr int kNumReserved = 5;

// A grounded image region: token span [start, start+len) in the source
// sentence plus the region's feature vector.
struct RegionAnnotation {
  int start = 0;
  int len = 0;
  std::vector<float> feature;
};

struct SentenceImagePair {
  std::string id;
  Tokens src;
  Tokens tgt;
  std::vector<RegionAnnotation> regions;
};

using Corpus = std::vector<SentenceImagePair>;

// Lowercased whitespace tokens with punctuation split into its own tokens.
Tokens tokenize(const std::string& text);
std::string join(const Tokens& tokens);

// Shared source/target vocabulary with fixed reserved ids.
class Vocab {
 public:
  Vocab();

  // Tokens with corpus frequency >= min_freq (source and target sides
  // pooled) are mapped; everything else falls back to <unk>.
  static Vocab build(const Corpus& corpus, int min_freq);

  int id(const Token& t) const {
    auto it = to_id_.find(t);
    return it == to_id_.end() ? kUnkId : it->second;
  }
  bool contains(const Token& t) const { return to_id_.count(t) != 0; }
  const Token& token(int id) const;
  int size() const { return static_cast<int>(to_token_.size()); }

  std::vector<int> ids(const Tokens& toks) const;
  Tokens tokens(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  int add(const Token& t);
  std::unordered_map<Token, int> to_id_;
  std::vector<Token> to_token_;
};

// Synthetic grounded-world generator configuration.
struct SynthConfig {
  int head_classes = 8;
  int modifier_classes = 6;
  int signal_dim = 16;
  int noise_dim = 48;
  double noise_sigma = 0.3;
  int sentences = 1000;
  std::uint64_t seed = 1;
};

// Closed lexicons of the synthetic world plus the deterministic bilingual
// lexicon used to produce target sentences.
struct SynthWorld {
  std::vector<Token> heads;      // base (singular) forms
  std::vector<Token> modifiers;
  std::vector<Token> verbs;
  std::vector<Token> preps;
  std::vector<Token> dets;

  Token target_of(const Token& src) const;           // lexicon lookup
  bool source_of(const Token& tgt, Token* out) const;  // inverse lookup
  Token plural_of(const Token& head) const { return head + "s"; }
  Token target_plural_of(const Token& head) const { return target_of(head) + "j"; }

  std::unordered_map<Token, Token> lexicon;  // source word -> target word
};

SynthWorld synth_world(const SynthConfig& cfg);

// Generates templated entity sentences.  Each entity phrase is
// "det modifier head" (or "modifier heads" when plural) and carries one
// RegionAnnotation spanning exactly those tokens, with feature =
// [unit-norm signal fixed per (head, modifier)] ++ [N(0, sigma^2) noise].
// Targets come from the bilingual lexicon with modifier/head order swapped.
// Pure function of cfg.
Corpus gen_synthetic(const SynthConfig& cfg);

// Signal block for one (head, modifier) class; unit norm.
std::vector<float> synth_signal(const SynthConfig& cfg, int head_idx, int mod_idx);

// Inverse of the generator's target mapping: inverse lexicon plus inverse
// modifier/head reordering.  Recovers the source sentence of a generated
// target exactly.
Tokens target_to_source(const Tokens& tgt, const SynthWorld& world);

// Replaces every source token covered by any region span with <mask>;
// spans and regions are preserved.
SentenceImagePair mask_visual_tokens(const SentenceImagePair& pair);
Corpus mask_visual_tokens(const Corpus& corpus);

// Fraction of source tokens covered by region spans.
double grounded_token_fraction(const Corpus& corpus);

// JSONL persistence; one object per line:
// {"id", "src": [tokens], "tgt": [tokens],
//  "regions": [{"start", "len", "feat": [floats]}]}
void save_corpus(const Corpus& corpus, const std::string& path);
Corpus load_corpus(const std::string& path);

}  // namespace phrasemt::data
