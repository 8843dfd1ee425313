#include "phrasemt/grounding.hpp"

#include <fstream>

#include <json.hpp>

#include "phrasemt/errors.hpp"

namespace phrasemt::ground {

PosLexicon PosLexicon::from_world(const data::SynthWorld& world) {
  PosLexicon lex;
  for (const auto& h : world.heads) {
    lex.add(h, PosTag::Noun);
    lex.add(world.plural_of(h), PosTag::Noun);
  }
  for (const auto& m : world.modifiers) lex.add(m, PosTag::Adj);
  for (const auto& v : world.verbs) lex.add(v, PosTag::Verb);
  for (const auto& p : world.preps) lex.add(p, PosTag::Prep);
  for (const auto& d : world.dets) lex.add(d, PosTag::Det);
  lex.add(".", PosTag::Punct);
  return lex;
}

std::vector<PhraseSpan> chunk_noun_phrases(const Tokens& tokens, const PosLexicon& lexicon) {
  std::vector<PhraseSpan> spans;
  const int n = static_cast<int>(tokens.size());
  int i = 0;
  while (i < n) {
    int j = i;
    if (lexicon.tag(tokens[static_cast<std::size_t>(j)]) == PosTag::Det) ++j;
    while (j < n && lexicon.tag(tokens[static_cast<std::size_t>(j)]) == PosTag::Adj) ++j;
    int k = j;
    while (k < n && lexicon.tag(tokens[static_cast<std::size_t>(k)]) == PosTag::Noun) ++k;
    if (k > j) {
      spans.push_back(PhraseSpan{i, k - i});
      i = k;
    } else {
      ++i;
    }
  }
  return spans;
}

Token head_of(const Tokens& phrase, const PosLexicon& lexicon) {
  for (auto it = phrase.rbegin(); it != phrase.rend(); ++it)
    if (lexicon.tag(*it) == PosTag::Noun) return *it;
  throw DomainError("head_of: no noun in phrase '" + data::join(phrase) + "'");
}

PhraseSet build_phrase_image_set(const data::Corpus& corpus, const PosLexicon& lexicon,
                                 const GroundingOptions& options) {
  PhraseSet set;
  for (const auto& pair : corpus) {
    std::vector<PhraseSpan> spans;
    if (options.spans == SpanSource::Chunker) {
      spans = chunk_noun_phrases(pair.src, lexicon);
    } else {
      for (const auto& r : pair.regions) spans.push_back(PhraseSpan{r.start, r.len});
    }
    for (const auto& span : spans) {
      const data::RegionAnnotation* region = nullptr;
      for (const auto& r : pair.regions) {
        if (r.start == span.start && r.len == span.len) {
          region = &r;
          break;
        }
      }
      if (!region) {
        if (options.policy == GroundingPolicy::Fail)
          throw DomainError("grounding: no region for phrase at [" + std::to_string(span.start) +
                            "," + std::to_string(span.len) + ") in " + pair.id);
        continue;
      }
      PhraseRegionPair out;
      out.phrase.assign(pair.src.begin() + span.start, pair.src.begin() + span.start + span.len);
      out.feature = region->feature;
      try {
        out.head = head_of(out.phrase, lexicon);
      } catch (const DomainError&) {
        out.head = out.phrase.back();  // provider spans may not match the POS pattern
      }
      out.source_id = pair.id;
      set.push_back(std::move(out));
    }
  }
  return set;
}

void save_phrase_set(const PhraseSet& set, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write phrase set: " + path);
  for (const auto& p : set) {
    nlohmann::ordered_json j;
    j["phrase"] = p.phrase;
    j["head"] = p.head;
    j["feat"] = p.feature;
    j["source_id"] = p.source_id;
    os << j.dump() << "\n";
  }
  if (!os) throw IoError("phrase set write failed: " + path);
}

PhraseSet load_phrase_set(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read phrase set: " + path);
  PhraseSet set;
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      PhraseRegionPair p;
      p.phrase = j.at("phrase").get<Tokens>();
      p.head = j.at("head").get<Token>();
      p.feature = j.at("feat").get<std::vector<float>>();
      p.source_id = j.at("source_id").get<std::string>();
      if (p.phrase.empty()) throw ParseError("empty phrase");
      set.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return set;
}

}  // namespace phrasemt::ground
