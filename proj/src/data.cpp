#include "phrasemt/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace phrasemt::data {

namespace {

bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) && c != '<' && c != '>';
}

// Word lists for the synthetic world.  Heads pluralize with a plain "s";
// no word is a prefix/suffix collision of another's target form.
const std::vector<Token> kHeads = {"car",   "dog",  "house", "tree",  "bird",  "boat",
                                   "horse", "chair", "table", "fish",  "ball",  "book",
                                   "lamp",  "truck", "shirt", "stone"};
const std::vector<Token> kModifiers = {"black", "white", "red",  "blue", "green", "small",
                                       "big",   "old",   "new",  "round", "long",  "dark"};
const std::vector<Token> kVerbs = {"sees",  "passes", "follows", "faces",
                                   "nears", "watches", "guards",  "meets"};
const std::vector<Token> kPreps = {"near", "behind", "beside", "above", "below", "past"};
const std::vector<Token> kDets = {"a", "the"};

constexpr double kTwoEntityProb = 0.9;
constexpr double kPluralProb = 0.25;

// Deterministic target form: reversed word plus "o" (injective on the word
// lists); determiners map to distinct articles so the mapping inverts.
Token foreign_form(const Token& w) {
  if (w == "a") return "la";
  if (w == "the") return "el";
  if (w == ".") return ".";
  Token r(w.rbegin(), w.rend());
  return r + "o";
}

}  // namespace

Tokens tokenize(const std::string& text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (char ch : text) {
    const unsigned char uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      flush();
    } else if (is_punct(ch)) {
      flush();
      out.push_back(std::string(1, ch));
    } else {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  flush();
  return out;
}

std::string join(const Tokens& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

Vocab::Vocab() {
  add(kPadToken);
  add(kBosToken);
  add(kEosToken);
  add(kUnkToken);
  add(kMaskToken);
}

int Vocab::add(const Token& t) {
  auto it = to_id_.find(t);
  if (it != to_id_.end()) return it->second;
  const int id = static_cast<int>(to_token_.size());
  to_token_.push_back(t);
  to_id_.emplace(t, id);
  return id;
}

Vocab Vocab::build(const Corpus& corpus, int min_freq) {
  std::map<Token, long> freq;  // ordered map keeps ties deterministic
  for (const auto& pair : corpus) {
    for (const auto& t : pair.src) ++freq[t];
    for (const auto& t : pair.tgt) ++freq[t];
  }
  std::vector<std::pair<Token, long>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (const auto& [tok, count] : items) {
    if (count >= min_freq && !v.contains(tok)) v.add(tok);
  }
  return v;
}

const Token& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw DomainError("vocab: id out of range: " + std::to_string(id));
  return to_token_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocab::ids(const Tokens& toks) const {
  std::vector<int> out;
  out.reserve(toks.size());
  for (const auto& t : toks) out.push_back(id(t));
  return out;
}

Tokens Vocab::tokens(const std::vector<int>& ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(token(i));
  return out;
}

void Vocab::save(const std::string& path) const {
  nlohmann::ordered_json j;
  j["tokens"] = to_token_;
  std::ofstream os(path);
  if (!os) throw IoError("cannot write vocab: " + path);
  os << j.dump() << "\n";
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read vocab: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad vocab file: ") + e.what());
  }
  const auto toks = j.at("tokens").get<std::vector<Token>>();
  Vocab v;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i < kNumReserved) {
      if (toks[i] != v.to_token_[i]) throw ParseError("vocab: reserved tokens corrupted");
      continue;
    }
    v.add(toks[i]);
  }
  return v;
}

namespace {

void validate(const SynthConfig& cfg) {
  if (cfg.head_classes < 2) throw ConfigError("synth: head_classes must be >= 2");
  if (cfg.modifier_classes < 1) throw ConfigError("synth: modifier_classes must be >= 1");
  if (cfg.head_classes > static_cast<int>(kHeads.size()))
    throw ConfigError("synth: head_classes exceeds available heads");
  if (cfg.modifier_classes > static_cast<int>(kModifiers.size()))
    throw ConfigError("synth: modifier_classes exceeds available modifiers");
  if (cfg.signal_dim < cfg.head_classes + cfg.modifier_classes)
    throw ConfigError("synth: signal_dim must be >= head_classes + modifier_classes");
  if (cfg.noise_dim < 0) throw ConfigError("synth: noise_dim must be >= 0");
  if (cfg.noise_sigma < 0) throw ConfigError("synth: noise_sigma must be >= 0");
  if (cfg.sentences < 1) throw ConfigError("synth: sentences must be >= 1");
}

}  // namespace

SynthWorld synth_world(const SynthConfig& cfg) {
  validate(cfg);
  SynthWorld w;
  w.heads.assign(kHeads.begin(), kHeads.begin() + cfg.head_classes);
  w.modifiers.assign(kModifiers.begin(), kModifiers.begin() + cfg.modifier_classes);
  w.verbs = kVerbs;
  w.preps = kPreps;
  w.dets = kDets;
  auto add = [&w](const Token& t) { w.lexicon[t] = foreign_form(t); };
  for (const auto& t : w.heads) add(t);
  for (const auto& t : w.modifiers) add(t);
  for (const auto& t : w.verbs) add(t);
  for (const auto& t : w.preps) add(t);
  for (const auto& t : w.dets) add(t);
  add(".");
  return w;
}

Token SynthWorld::target_of(const Token& src) const {
  auto it = lexicon.find(src);
  if (it == lexicon.end()) throw DomainError("synth lexicon: unknown source word " + src);
  return it->second;
}

bool SynthWorld::source_of(const Token& tgt, Token* out) const {
  for (const auto& [s, t] : lexicon) {
    if (t == tgt) {
      *out = s;
      return true;
    }
  }
  return false;
}

std::vector<float> synth_signal(const SynthConfig& cfg, int head_idx, int mod_idx) {
  std::vector<float> sig(static_cast<std::size_t>(cfg.signal_dim), 0.0f);
  const float amp = static_cast<float>(1.0 / std::sqrt(2.0));
  sig[static_cast<std::size_t>(head_idx)] = amp;
  sig[static_cast<std::size_t>(cfg.head_classes + mod_idx)] = amp;
  return sig;
}

Corpus gen_synthetic(const SynthConfig& cfg) {
  validate(cfg);
  const SynthWorld world = synth_world(cfg);
  RngState rng(cfg.seed);
  Corpus corpus;
  corpus.reserve(static_cast<std::size_t>(cfg.sentences));

  struct Entity {
    int head, mod;
    bool plural;
    int det;
  };

  auto draw_entity = [&]() {
    Entity e;
    e.head = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.head_classes)));
    e.mod = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.modifier_classes)));
    e.plural = rng.uniform() < kPluralProb;
    e.det = static_cast<int>(rng.below(world.dets.size()));
    return e;
  };

  auto entity_src = [&](const Entity& e) -> Tokens {
    if (e.plural) return {world.modifiers[e.mod], world.plural_of(world.heads[e.head])};
    return {world.dets[e.det], world.modifiers[e.mod], world.heads[e.head]};
  };
  auto entity_tgt = [&](const Entity& e) -> Tokens {
    if (e.plural) return {world.target_plural_of(world.heads[e.head]),
                          world.target_of(world.modifiers[e.mod])};
    return {world.target_of(world.dets[e.det]), world.target_of(world.heads[e.head]),
            world.target_of(world.modifiers[e.mod])};
  };

  for (int s = 0; s < cfg.sentences; ++s) {
    SentenceImagePair pair;
    {
      std::ostringstream id;
      id << "synth-" << cfg.seed << "-";
      id.width(6);
      id.fill('0');
      id << s;
      pair.id = id.str();
    }
    const bool two = rng.uniform() < kTwoEntityProb;
    const Entity e1 = draw_entity();
    const Entity e2 = two ? draw_entity() : Entity{};
    const Token verb = world.verbs[rng.below(world.verbs.size())];
    const Token prep = world.preps[rng.below(world.preps.size())];

    auto append_entity = [&](const Entity& e) {
      RegionAnnotation region;
      region.start = static_cast<int>(pair.src.size());
      const Tokens toks = entity_src(e);
      region.len = static_cast<int>(toks.size());
      pair.src.insert(pair.src.end(), toks.begin(), toks.end());
      region.feature = synth_signal(cfg, e.head, e.mod);
      region.feature.reserve(static_cast<std::size_t>(cfg.signal_dim + cfg.noise_dim));
      for (int i = 0; i < cfg.noise_dim; ++i)
        region.feature.push_back(static_cast<float>(cfg.noise_sigma * rng.normal()));
      pair.regions.push_back(std::move(region));
      const Tokens t = entity_tgt(e);
      pair.tgt.insert(pair.tgt.end(), t.begin(), t.end());
    };

    append_entity(e1);
    pair.src.push_back(verb);
    pair.tgt.push_back(world.target_of(verb));
    if (two) {
      pair.src.push_back(prep);
      pair.tgt.push_back(world.target_of(prep));
      append_entity(e2);
    }
    pair.src.push_back(".");
    pair.tgt.push_back(".");
    corpus.push_back(std::move(pair));
  }
  return corpus;
}

Tokens target_to_source(const Tokens& tgt, const SynthWorld& world) {
  Tokens src;
  std::size_t i = 0;
  auto invert = [&](const Token& t) {
    Token s;
    if (!world.source_of(t, &s)) throw DomainError("inverse lexicon: unknown target word " + t);
    return s;
  };
  while (i < tgt.size()) {
    const Token& t = tgt[i];
    Token stem;
    if (t.size() > 1 && t.back() == 'j' && world.source_of(t.substr(0, t.size() - 1), &stem)) {
      // plural entity: "<head>j <mod>" -> "<mod> <head>s"
      if (i + 1 >= tgt.size()) throw DomainError("inverse lexicon: dangling plural head");
      src.push_back(invert(tgt[i + 1]));
      src.push_back(world.plural_of(stem));
      i += 2;
    } else if (t == "la" || t == "el") {
      // singular entity: "det <head> <mod>" -> "det <mod> <head>"
      if (i + 2 >= tgt.size()) throw DomainError("inverse lexicon: truncated entity");
      src.push_back(invert(t));
      src.push_back(invert(tgt[i + 2]));
      src.push_back(invert(tgt[i + 1]));
      i += 3;
    } else {
      src.push_back(invert(t));
      ++i;
    }
  }
  return src;
}

SentenceImagePair mask_visual_tokens(const SentenceImagePair& pair) {
  SentenceImagePair out = pair;
  for (const auto& region : pair.regions) {
    if (region.start < 0 || region.len < 1 ||
        region.start + region.len > static_cast<int>(pair.src.size()))
      throw DomainError("mask: region span out of bounds in " + pair.id);
    for (int i = region.start; i < region.start + region.len; ++i)
      out.src[static_cast<std::size_t>(i)] = kMaskToken;
  }
  return out;
}

Corpus mask_visual_tokens(const Corpus& corpus) {
  Corpus out;
  out.reserve(corpus.size());
  for (const auto& p : corpus) out.push_back(mask_visual_tokens(p));
  return out;
}

double grounded_token_fraction(const Corpus& corpus) {
  long covered = 0, total = 0;
  for (const auto& pair : corpus) {
    std::vector<bool> hit(pair.src.size(), false);
    for (const auto& r : pair.regions)
      for (int i = r.start; i < r.start + r.len && i < static_cast<int>(hit.size()); ++i)
        hit[static_cast<std::size_t>(i)] = true;
    for (bool b : hit) covered += b ? 1 : 0;
    total += static_cast<long>(pair.src.size());
  }
  return total ? static_cast<double>(covered) / static_cast<double>(total) : 0.0;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write corpus: " + path);
  for (const auto& pair : corpus) {
    nlohmann::ordered_json j;
    j["id"] = pair.id;
    j["src"] = pair.src;
    j["tgt"] = pair.tgt;
    nlohmann::ordered_json regions = nlohmann::ordered_json::array();
    for (const auto& r : pair.regions) {
      nlohmann::ordered_json rj;
      rj["start"] = r.start;
      rj["len"] = r.len;
      rj["feat"] = r.feature;
      regions.push_back(std::move(rj));
    }
    j["regions"] = std::move(regions);
    os << j.dump() << "\n";
  }
  if (!os) throw IoError("corpus write failed: " + path);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read corpus: " + path);
  Corpus corpus;
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      SentenceImagePair pair;
      pair.id = j.at("id").get<std::string>();
      pair.src = j.at("src").get<Tokens>();
      pair.tgt = j.at("tgt").get<Tokens>();
      for (const auto& rj : j.at("regions")) {
        RegionAnnotation r;
        r.start = rj.at("start").get<int>();
        r.len = rj.at("len").get<int>();
        r.feature = rj.at("feat").get<std::vector<float>>();
        pair.regions.push_back(std::move(r));
      }
      if (pair.src.empty() || pair.tgt.empty())
        throw ParseError("empty src or tgt");
      for (const auto& r : pair.regions)
        if (r.start < 0 || r.len < 1 || r.start + r.len > static_cast<int>(pair.src.size()))
          throw ParseError("region span out of source bounds");
      corpus.push_back(std::move(pair));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace phrasemt::data
