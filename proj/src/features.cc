#include "varieties/features.h"

#include <algorithm>
#include <charconv>
#include <ostream>

#include "varieties/error.h"

namespace varieties {
namespace {

FeatureVector normalize(const std::map<std::string, std::size_t>& counts,
                        FeatureFamily family, std::size_t token_count) {
  FeatureVector v;
  v.token_count = token_count;
  if (token_count == 0) return v;
  for (const auto& [key, count] : counts) {
    if (count == 0) continue;
    v.values.emplace(FeatureId{family, key},
                     static_cast<double>(count) /
                         static_cast<double>(token_count));
  }
  return v;
}

std::map<std::string, std::size_t> pos3_counts(const CorpusView& chunk) {
  std::map<std::string, std::size_t> counts;
  for (const AnnotatedSentence* s : chunk.sentences()) {
    const auto& toks = s->tokens;
    for (const Token& t : toks) {
      if (!t.pos) {
        throw ValidationError("POS trigram features need POS tags; token '" +
                              t.surface + "' has none");
      }
    }
    for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
      ++counts[*toks[i].pos + "_" + *toks[i + 1].pos + "_" + *toks[i + 2].pos];
    }
  }
  return counts;
}

std::map<std::string, std::size_t> postok_counts(const CorpusView& chunk) {
  std::map<std::string, std::size_t> counts;
  for (const AnnotatedSentence* s : chunk.sentences()) {
    for (std::string& e : positional_events(s->tokens)) ++counts[std::move(e)];
  }
  return counts;
}

std::vector<std::string> phrase_tokens(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.surface);
  return out;
}

}  // namespace

std::string_view family_code(FeatureFamily family) {
  switch (family) {
    case FeatureFamily::kFunctionWords:
      return "FW";
    case FeatureFamily::kPosTrigrams:
      return "POS3";
    case FeatureFamily::kPositionalTokens:
      return "POSTOK";
    case FeatureFamily::kCohesiveMarkers:
      return "COH";
  }
  return "?";
}

std::string FeatureId::str() const {
  return std::string(family_code(family)) + ":" + key;
}

double FeatureVector::get(const FeatureId& id) const {
  auto it = values.find(id);
  return it == values.end() ? 0.0 : it->second;
}

FeatureSpace::FeatureSpace(FeatureFamily family, std::vector<std::string> keys,
                           std::string provenance)
    : family_(family), keys_(std::move(keys)),
      provenance_(std::move(provenance)) {
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (keys_[i].empty()) throw ValidationError("feature space: empty key");
    if (!index_.emplace(keys_[i], i).second) {
      throw ValidationError("feature space: duplicate key '" + keys_[i] + "'");
    }
  }
  if (family_ == FeatureFamily::kCohesiveMarkers) {
    std::vector<Phrase> phrases;
    phrases.reserve(keys_.size());
    for (const std::string& k : keys_) {
      Phrase p;
      std::size_t i = 0;
      while (i < k.size()) {
        const auto j = k.find(' ', i);
        const auto end = j == std::string::npos ? k.size() : j;
        if (end > i) p.tokens.push_back(k.substr(i, end - i));
        i = end + 1;
      }
      phrases.push_back(std::move(p));
    }
    phrases_ = PhraseList(provenance_, std::move(phrases));
  }
}

std::optional<std::size_t> FeatureSpace::index_of(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

FeatureVector extract_fw(const CorpusView& chunk, const WordList& fw) {
  std::map<std::string, std::size_t> counts;
  for (const AnnotatedSentence* s : chunk.sentences()) {
    for (const Token& t : s->tokens) {
      if (fw.contains(t.surface)) ++counts[t.surface];
    }
  }
  return normalize(counts, FeatureFamily::kFunctionWords, chunk.token_count());
}

FeatureVector extract_pos3(const CorpusView& chunk) {
  return normalize(pos3_counts(chunk), FeatureFamily::kPosTrigrams,
                   chunk.token_count());
}

std::vector<std::string> positional_events(std::span<const Token> sentence) {
  std::vector<std::string> events;
  const std::size_t n = sentence.size();
  if (n == 0) return events;
  events.push_back("first:" + sentence[0].surface);
  if (n >= 2) events.push_back("second:" + sentence[1].surface);
  if (n >= 3) events.push_back("third:" + sentence[2].surface);
  if (n >= 2) events.push_back("penultimate:" + sentence[n - 2].surface);
  events.push_back("last:" + sentence[n - 1].surface);
  return events;
}

FeatureVector extract_postok(const CorpusView& chunk,
                             const FeatureSpace& vocab) {
  auto counts = postok_counts(chunk);
  std::erase_if(counts, [&](const auto& kv) {
    return !vocab.index_of(kv.first).has_value();
  });
  return normalize(counts, FeatureFamily::kPositionalTokens,
                   chunk.token_count());
}

FeatureVector extract_coh(const CorpusView& chunk, const PhraseList& markers) {
  std::map<std::string, std::size_t> counts;
  for (const AnnotatedSentence* s : chunk.sentences()) {
    const auto toks = phrase_tokens(s->tokens);
    for (const PhraseMatch& m : match_phrases(toks, markers)) {
      ++counts[markers.entries()[m.phrase].text()];
    }
  }
  return normalize(counts, FeatureFamily::kCohesiveMarkers,
                   chunk.token_count());
}

FeatureSpace function_word_space(const WordList& fw) {
  return FeatureSpace(FeatureFamily::kFunctionWords, fw.entries(),
                      "function words: " + fw.name());
}

FeatureSpace cohesive_marker_space(const PhraseList& markers) {
  std::vector<std::string> keys;
  keys.reserve(markers.size());
  for (const Phrase& p : markers.entries()) keys.push_back(p.text());
  return FeatureSpace(FeatureFamily::kCohesiveMarkers, std::move(keys),
                      "cohesive markers: " + markers.name());
}

FeatureSpace select_top_pos3(std::span<const Chunk> training, std::size_t k) {
  std::map<std::string, std::size_t> total;
  for (const Chunk& c : training) {
    for (const auto& [key, count] : pos3_counts(c.view())) total[key] += count;
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(total.begin(),
                                                          total.end());
  // `total` is key-ordered, so a stable sort by count keeps ties
  // lexicographic.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  if (ranked.size() > k) ranked.resize(k);
  std::vector<std::string> keys;
  keys.reserve(ranked.size());
  for (auto& [key, count] : ranked) keys.push_back(std::move(key));
  return FeatureSpace(FeatureFamily::kPosTrigrams, std::move(keys),
                      "top-" + std::to_string(k) +
                          " POS trigrams from training split");
}

FeatureSpace select_postok_vocab(std::span<const Chunk> training,
                                 std::size_t min_count) {
  std::map<std::string, std::size_t> total;
  for (const Chunk& c : training) {
    for (const auto& [key, count] : postok_counts(c.view())) {
      total[key] += count;
    }
  }
  std::vector<std::string> keys;
  for (const auto& [key, count] : total) {
    if (count >= min_count) keys.push_back(key);
  }
  return FeatureSpace(FeatureFamily::kPositionalTokens, std::move(keys),
                      "positional tokens with training count >= " +
                          std::to_string(min_count));
}

FeatureVector extract(const CorpusView& chunk, const FeatureSpace& space) {
  switch (space.family()) {
    case FeatureFamily::kFunctionWords: {
      std::map<std::string, std::size_t> counts;
      for (const AnnotatedSentence* s : chunk.sentences()) {
        for (const Token& t : s->tokens) {
          if (space.index_of(t.surface)) ++counts[t.surface];
        }
      }
      return normalize(counts, FeatureFamily::kFunctionWords,
                       chunk.token_count());
    }
    case FeatureFamily::kPosTrigrams: {
      auto counts = pos3_counts(chunk);
      std::erase_if(counts, [&](const auto& kv) {
        return !space.index_of(kv.first).has_value();
      });
      return normalize(counts, FeatureFamily::kPosTrigrams,
                       chunk.token_count());
    }
    case FeatureFamily::kPositionalTokens:
      return extract_postok(chunk, space);
    case FeatureFamily::kCohesiveMarkers:
      if (space.size() == 0) {
        FeatureVector empty;
        empty.token_count = chunk.token_count();
        return empty;
      }
      return extract_coh(chunk, space.phrases());
  }
  return {};
}

std::vector<double> vectorize(const CorpusView& chunk,
                              std::span<const FeatureSpace> spaces) {
  std::vector<double> dense(total_dimension(spaces), 0.0);
  std::size_t offset = 0;
  for (const FeatureSpace& space : spaces) {
    const FeatureVector sparse = extract(chunk, space);
    for (const auto& [id, value] : sparse.values) {
      if (auto i = space.index_of(id.key)) dense[offset + *i] = value;
    }
    offset += space.size();
  }
  return dense;
}

std::size_t total_dimension(std::span<const FeatureSpace> spaces) {
  std::size_t d = 0;
  for (const FeatureSpace& s : spaces) d += s.size();
  return d;
}

std::vector<FeatureId> feature_ids(std::span<const FeatureSpace> spaces) {
  std::vector<FeatureId> ids;
  ids.reserve(total_dimension(spaces));
  for (const FeatureSpace& s : spaces) {
    for (std::size_t i = 0; i < s.size(); ++i) ids.push_back(s.id(i));
  }
  return ids;
}

std::string FeatureSetSpec::name() const {
  std::string out;
  auto add = [&](bool on, const char* code) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += code;
  };
  add(fw, "FW");
  add(pos3, "POS");
  add(postok, "POSTOK");
  add(coh, "COH");
  return out;
}

FeatureSetSpec parse_feature_set(std::string_view text) {
  FeatureSetSpec spec;
  std::size_t i = 0;
  while (i <= text.size()) {
    auto j = text.find('+', i);
    if (j == std::string_view::npos) j = text.size();
    const std::string_view part = text.substr(i, j - i);
    if (part == "FW") {
      spec.fw = true;
    } else if (part == "POS" || part == "POS3") {
      spec.pos3 = true;
    } else if (part == "POSTOK") {
      spec.postok = true;
    } else if (part == "COH") {
      spec.coh = true;
    } else {
      throw ValidationError("unknown feature family '" + std::string(part) +
                            "' in '" + std::string(text) + "'");
    }
    i = j + 1;
  }
  return spec;
}

std::vector<FeatureSpace> build_spaces(const FeatureSetSpec& spec,
                                       std::span<const Chunk> training,
                                       const ResourceBundle& resources) {
  std::vector<FeatureSpace> spaces;
  if (spec.fw) {
    if (resources.function_words.size() == 0) {
      throw ValidationError("FW features need a function_words resource");
    }
    spaces.push_back(function_word_space(resources.function_words));
  }
  if (spec.pos3) spaces.push_back(select_top_pos3(training, spec.pos3_top_k));
  if (spec.postok) {
    spaces.push_back(select_postok_vocab(training, spec.postok_min_count));
  }
  if (spec.coh) {
    if (resources.cohesive_markers.size() == 0) {
      throw ValidationError("COH features need a cohesive_markers resource");
    }
    spaces.push_back(cohesive_marker_space(resources.cohesive_markers));
  }
  return spaces;
}

std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_sparse_csv(std::span<const FeatureVector> rows, std::ostream& out) {
  out << "chunk_id,feature,value\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [id, value] : rows[i].values) {
      out << i << ',' << csv_field(id.str()) << ',' << format_double(value)
          << '\n';
    }
  }
}

void write_dense_csv(std::span<const std::vector<double>> rows,
                     std::span<const FeatureSpace> spaces, std::ostream& out) {
  out << "chunk_id";
  for (const FeatureId& id : feature_ids(spaces)) {
    out << ',' << csv_field(id.str());
  }
  out << '\n';
  const std::size_t dim = total_dimension(spaces);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw ValidationError("dense row " + std::to_string(i) +
                            " has dimension " +
                            std::to_string(rows[i].size()) + ", expected " +
                            std::to_string(dim));
    }
    out << i;
    for (double v : rows[i]) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace varieties
