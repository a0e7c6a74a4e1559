#include "varieties/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "varieties/error.h"
#include "varieties/lexicons.h"
#include "varieties/rng.h"

namespace varieties {
namespace {

using nlohmann::json;

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Typographic punctuation that shows up in transcribed proceedings.
constexpr std::string_view kUnicodePunct[] = {
    "‘", "’", "“", "”", "–", "—", "…",
    "«", "»", "·"};

bool punctuation_only(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      if (!std::ispunct(c)) return false;
      ++i;
      continue;
    }
    bool matched = false;
    for (std::string_view p : kUnicodePunct) {
      if (s.substr(i, p.size()) == p) {
        i += p.size();
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return !s.empty();
}

void check_token(const Token& token) {
  if (token.surface.empty()) throw ValidationError("empty token surface");
  if (has_whitespace(token.surface)) {
    throw ValidationError("token contains whitespace: '" + token.surface +
                          "'");
  }
}

void finish_sentence(AnnotatedSentence& sentence,
                     const IngestOptions& options) {
  if (sentence.country && !sentence.family) {
    sentence.family = family_of_country(*sentence.country);
  }
  if (options.tagset != nullptr) {
    for (Token& t : sentence.tokens) {
      t.out_of_tagset = t.pos && !options.tagset->contains(*t.pos);
    }
  }
  validate_sentence(sentence);
}

std::vector<std::string> string_array(const json& value, const char* field) {
  if (!value.is_array()) {
    throw ValidationError(std::string("field '") + field +
                          "' must be an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(value.size());
  for (const json& item : value) {
    if (!item.is_string()) {
      throw ValidationError(std::string("field '") + field +
                            "' must be an array of strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

AnnotatedSentence parse_jsonl_record(const json& record,
                                     const IngestOptions& options) {
  if (!record.is_object()) throw ValidationError("record is not an object");
  AnnotatedSentence sentence;
  std::vector<std::string> surfaces;
  if (record.contains("tokens")) {
    surfaces = string_array(record["tokens"], "tokens");
  } else if (record.contains("text")) {
    if (!record["text"].is_string()) {
      throw ValidationError("field 'text' must be a string");
    }
    if (record.contains("pos") || record.contains("lemma")) {
      throw ValidationError("raw 'text' records cannot carry pos/lemma");
    }
    surfaces = tokenize_raw(record["text"].get<std::string>());
  } else {
    throw ValidationError("missing required field 'tokens'");
  }
  if (surfaces.empty()) throw ValidationError("sentence has no tokens");

  std::vector<std::string> pos, lemma;
  if (record.contains("pos")) {
    pos = string_array(record["pos"], "pos");
    if (pos.size() != surfaces.size()) {
      throw ValidationError("'pos' length differs from 'tokens' length");
    }
  }
  if (record.contains("lemma")) {
    lemma = string_array(record["lemma"], "lemma");
    if (lemma.size() != surfaces.size()) {
      throw ValidationError("'lemma' length differs from 'tokens' length");
    }
  }
  sentence.tokens.resize(surfaces.size());
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    Token& t = sentence.tokens[i];
    t.surface = ascii_lower(surfaces[i]);
    // Empty strings stand for "no annotation" on this token.
    if (!pos.empty() && !pos[i].empty()) t.pos = pos[i];
    if (!lemma.empty() && !lemma[i].empty()) t.lemma = lemma[i];
  }

  if (record.contains("variety")) {
    if (!record["variety"].is_string()) {
      throw ValidationError("field 'variety' must be a string");
    }
    const std::string name = record["variety"].get<std::string>();
    auto v = parse_variety(name);
    if (!v) throw ValidationError("unknown variety label '" + name + "'");
    sentence.variety = *v;
  } else if (options.default_variety) {
    sentence.variety = *options.default_variety;
  } else {
    throw ValidationError("missing field 'variety'");
  }
  if (record.contains("country") && !record["country"].is_null()) {
    sentence.country = record["country"].get<std::string>();
  }
  if (record.contains("family") && !record["family"].is_null()) {
    const std::string name = record["family"].get<std::string>();
    auto f = parse_family(name);
    if (!f) throw ValidationError("unknown language family '" + name + "'");
    sentence.family = *f;
  }
  finish_sentence(sentence, options);
  return sentence;
}

}  // namespace

std::string_view variety_name(Variety v) {
  switch (v) {
    case Variety::kNative:
      return "N";
    case Variety::kNonNative:
      return "NN";
    case Variety::kTranslated:
      return "T";
  }
  return "?";
}

std::optional<Variety> parse_variety(std::string_view name) {
  if (name == "N") return Variety::kNative;
  if (name == "NN") return Variety::kNonNative;
  if (name == "T") return Variety::kTranslated;
  return std::nullopt;
}

std::string_view family_name(LanguageFamily f) {
  switch (f) {
    case LanguageFamily::kGermanic:
      return "Germanic";
    case LanguageFamily::kRomance:
      return "Romance";
    case LanguageFamily::kOther:
      return "Other";
  }
  return "?";
}

std::optional<LanguageFamily> parse_family(std::string_view name) {
  if (name == "Germanic") return LanguageFamily::kGermanic;
  if (name == "Romance") return LanguageFamily::kRomance;
  if (name == "Other") return LanguageFamily::kOther;
  return std::nullopt;
}

LanguageFamily family_of_country(std::string_view code) {
  static constexpr std::string_view kGermanic[] = {"AT", "DE", "NL", "SE"};
  static constexpr std::string_view kRomance[] = {"PT", "IT", "ES", "FR",
                                                  "RO"};
  const std::string upper = [&] {
    std::string s(code);
    for (char& c : s) {
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return s;
  }();
  if (std::find(std::begin(kGermanic), std::end(kGermanic), upper) !=
      std::end(kGermanic)) {
    return LanguageFamily::kGermanic;
  }
  if (std::find(std::begin(kRomance), std::end(kRomance), upper) !=
      std::end(kRomance)) {
    return LanguageFamily::kRomance;
  }
  return LanguageFamily::kOther;
}

void validate_sentence(const AnnotatedSentence& sentence) {
  if (sentence.tokens.empty()) throw ValidationError("sentence has no tokens");
  for (const Token& t : sentence.tokens) check_token(t);
  if (sentence.country && sentence.family &&
      family_of_country(*sentence.country) != *sentence.family) {
    throw ValidationError("family '" +
                          std::string(family_name(*sentence.family)) +
                          "' inconsistent with country '" + *sentence.country +
                          "'");
  }
}

Corpus::Corpus(std::vector<AnnotatedSentence> sentences, std::string provenance)
    : sentences_(std::move(sentences)), provenance_(std::move(provenance)) {
  for (const AnnotatedSentence& s : sentences_) token_count_ += s.tokens.size();
}

CorpusView::CorpusView(const Corpus& corpus) {
  sentences_.reserve(corpus.size());
  for (const AnnotatedSentence& s : corpus.sentences()) push_back(&s);
}

CorpusView::CorpusView(std::vector<const AnnotatedSentence*> sentences)
    : sentences_(std::move(sentences)) {
  for (const AnnotatedSentence* s : sentences_) token_count_ += s->tokens.size();
}

void CorpusView::push_back(const AnnotatedSentence* sentence) {
  sentences_.push_back(sentence);
  token_count_ += sentence->tokens.size();
}

CorpusView Chunk::view() const {
  CorpusView v;
  for (const AnnotatedSentence& s : sentences) v.push_back(&s);
  return v;
}

CorpusFormat guess_format(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".vert" || ext == ".vrt") return CorpusFormat::kVertical;
  return CorpusFormat::kJsonl;
}

Corpus ingest(const std::filesystem::path& path, CorpusFormat format,
              const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus file " + path.string());
  return format == CorpusFormat::kJsonl
             ? ingest_jsonl(in, path.string(), options)
             : ingest_vertical(in, path.string(), options);
}

Corpus ingest_jsonl(std::istream& in, const std::string& source,
                    const IngestOptions& options) {
  std::vector<AnnotatedSentence> sentences;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      sentences.push_back(parse_jsonl_record(json::parse(line), options));
    } catch (const json::exception& e) {
      throw ParseError(source, line_no, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  if (sentences.empty()) throw ValidationError(source + ": empty corpus file");
  return Corpus(std::move(sentences), source);
}

Corpus ingest_vertical(std::istream& in, const std::string& source,
                       const IngestOptions& options) {
  std::vector<AnnotatedSentence> sentences;
  std::optional<Variety> variety = options.default_variety;
  std::optional<std::string> country;
  std::optional<LanguageFamily> family;
  AnnotatedSentence current;
  std::size_t sentence_start = 0;

  auto flush = [&](std::size_t line_no) {
    if (current.tokens.empty()) return;
    if (!variety) {
      throw ParseError(source, sentence_start,
                       "sentence without a #variety= header");
    }
    current.variety = *variety;
    current.country = country;
    current.family = family;
    try {
      finish_sentence(current, options);
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
    sentences.push_back(std::move(current));
    current = AnnotatedSentence{};
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush(line_no);
      continue;
    }
    if (line[0] == '#') {
      flush(line_no);
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;  // free comment
      const std::string key = line.substr(1, eq - 1);
      const std::string value = line.substr(eq + 1);
      if (key == "variety") {
        variety = parse_variety(value);
        if (!variety) {
          throw ParseError(source, line_no,
                           "unknown variety label '" + value + "'");
        }
      } else if (key == "country") {
        country = value.empty() ? std::nullopt
                                : std::optional<std::string>(value);
        family.reset();
      } else if (key == "family") {
        family = parse_family(value);
        if (!family) {
          throw ParseError(source, line_no,
                           "unknown language family '" + value + "'");
        }
      }
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.empty() || fields.size() > 3 || fields[0].empty()) {
      throw ParseError(source, line_no,
                       "expected surface[<TAB>pos[<TAB>lemma]]");
    }
    if (current.tokens.empty()) sentence_start = line_no;
    Token t;
    t.surface = ascii_lower(fields[0]);
    if (fields.size() > 1 && !fields[1].empty()) t.pos = fields[1];
    if (fields.size() > 2 && !fields[2].empty()) t.lemma = fields[2];
    if (has_whitespace(t.surface)) {
      throw ParseError(source, line_no, "token contains whitespace");
    }
    current.tokens.push_back(std::move(t));
  }
  flush(line_no);
  if (sentences.empty()) throw ValidationError(source + ": empty corpus file");
  return Corpus(std::move(sentences), source);
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const AnnotatedSentence& s : corpus.sentences()) {
    json record;
    json tokens = json::array();
    bool any_pos = false, any_lemma = false;
    for (const Token& t : s.tokens) {
      tokens.push_back(t.surface);
      any_pos |= t.pos.has_value();
      any_lemma |= t.lemma.has_value();
    }
    record["tokens"] = std::move(tokens);
    if (any_pos) {
      json pos = json::array();
      for (const Token& t : s.tokens) pos.push_back(t.pos.value_or(""));
      record["pos"] = std::move(pos);
    }
    if (any_lemma) {
      json lemma = json::array();
      for (const Token& t : s.tokens) lemma.push_back(t.lemma.value_or(""));
      record["lemma"] = std::move(lemma);
    }
    record["variety"] = std::string(variety_name(s.variety));
    if (s.country) record["country"] = *s.country;
    if (s.family) record["family"] = std::string(family_name(*s.family));
    out << record.dump() << '\n';
  }
}

std::vector<std::string> tokenize_raw(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() &&
           std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
    std::size_t j = i;
    while (j < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    if (j > i) {
      std::string_view word = text.substr(i, j - i);
      if (!punctuation_only(word)) out.push_back(ascii_lower(word));
    }
    i = j;
  }
  return out;
}

Corpus shuffle(const Corpus& corpus, std::uint64_t seed) {
  std::vector<AnnotatedSentence> sentences = corpus.sentences();
  Rng rng(seed);
  rng.shuffle(std::span<AnnotatedSentence>(sentences));
  return Corpus(std::move(sentences), corpus.provenance());
}

ChunkingResult chunk_with_remainder(const Corpus& corpus,
                                    std::size_t target_size) {
  if (target_size == 0) throw ValidationError("chunk target size must be > 0");
  ChunkingResult result;
  if (corpus.empty()) return result;
  const Variety variety = corpus.sentences().front().variety;
  Chunk current;
  current.variety = variety;
  for (const AnnotatedSentence& s : corpus.sentences()) {
    if (s.variety != variety) {
      throw ValidationError("chunk: corpus mixes varieties " +
                            std::string(variety_name(variety)) + " and " +
                            std::string(variety_name(s.variety)));
    }
    current.sentences.push_back(s);
    current.token_count += s.tokens.size();
    if (current.token_count >= target_size) {
      result.chunks.push_back(std::move(current));
      current = Chunk{};
      current.variety = variety;
    }
  }
  if (current.token_count > 0) {
    if (2 * current.token_count >= target_size) {
      result.chunks.push_back(std::move(current));
    } else {
      result.dropped_tokens = current.token_count;
    }
  }
  return result;
}

std::vector<Chunk> chunk(const Corpus& corpus, std::size_t target_size) {
  return chunk_with_remainder(corpus, target_size).chunks;
}

ChunksByVariety balance(const ChunksByVariety& chunks, std::uint64_t seed) {
  if (chunks.empty()) throw ValidationError("balance: no varieties given");
  std::size_t target = SIZE_MAX;
  for (const auto& [variety, list] : chunks) {
    if (list.empty()) {
      throw ValidationError("balance: variety " +
                            std::string(variety_name(variety)) +
                            " has no chunks");
    }
    target = std::min(target, list.size());
  }
  ChunksByVariety out;
  std::uint64_t stream = 0;
  for (const auto& [variety, list] : chunks) {
    std::vector<std::size_t> index(list.size());
    std::iota(index.begin(), index.end(), 0);
    Rng rng(derive_seed(seed, stream++));
    rng.shuffle(std::span<std::size_t>(index));
    index.resize(target);
    std::sort(index.begin(), index.end());
    std::vector<Chunk>& kept = out[variety];
    kept.reserve(target);
    for (std::size_t i : index) kept.push_back(list[i]);
  }
  return out;
}

bool SentenceFilter::matches(const AnnotatedSentence& s) const {
  if (variety && s.variety != *variety) return false;
  if (country && (!s.country || *s.country != *country)) return false;
  if (family && (!s.family || *s.family != *family)) return false;
  return true;
}

Corpus filter(const Corpus& corpus, const SentenceFilter& predicate) {
  return filter(corpus, [&](const AnnotatedSentence& s) {
    return predicate.matches(s);
  });
}

Corpus filter(const Corpus& corpus,
              const std::function<bool(const AnnotatedSentence&)>& predicate) {
  std::vector<AnnotatedSentence> kept;
  for (const AnnotatedSentence& s : corpus.sentences()) {
    if (predicate(s)) kept.push_back(s);
  }
  return Corpus(std::move(kept), corpus.provenance());
}

Corpus take_tokens(const Corpus& corpus, std::size_t tokens) {
  std::vector<AnnotatedSentence> kept;
  std::size_t count = 0;
  for (const AnnotatedSentence& s : corpus.sentences()) {
    if (count >= tokens) break;
    kept.push_back(s);
    count += s.tokens.size();
  }
  return Corpus(std::move(kept), corpus.provenance());
}

Corpus concat(std::span<const Corpus* const> parts) {
  std::vector<AnnotatedSentence> all;
  std::string provenance;
  for (const Corpus* c : parts) {
    all.insert(all.end(), c->sentences().begin(), c->sentences().end());
    if (!provenance.empty()) provenance += "+";
    provenance += c->provenance();
  }
  return Corpus(std::move(all), provenance);
}

}  // namespace varieties
