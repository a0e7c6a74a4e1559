#ifndef VARIETIES_CORPUS_H_
#define VARIETIES_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace varieties {

class TagSet;

enum class Variety { kNative, kNonNative, kTranslated };

inline constexpr Variety kAllVarieties[] = {
    Variety::kNative, Variety::kNonNative, Variety::kTranslated};

// "N", "NN" or "T".
std::string_view variety_name(Variety v);
std::optional<Variety> parse_variety(std::string_view name);

enum class LanguageFamily { kGermanic, kRomance, kOther };

std::string_view family_name(LanguageFamily f);
std::optional<LanguageFamily> parse_family(std::string_view name);

// Germanic: AT DE NL SE. Romance: PT IT ES FR RO. Everything else: Other.
LanguageFamily family_of_country(std::string_view iso_alpha2);

struct Token {
  std::string surface;
  std::optional<std::string> pos;
  std::optional<std::string> lemma;
  // Set at ingest when a tagset is supplied and `pos` is not a member.
  bool out_of_tagset = false;

  // Lemma when present, otherwise the surface form.
  const std::string& lemma_or_surface() const {
    return lemma ? *lemma : surface;
  }

  bool operator==(const Token&) const = default;
};

struct AnnotatedSentence {
  std::vector<Token> tokens;
  Variety variety = Variety::kNative;
  std::optional<std::string> country;
  std::optional<LanguageFamily> family;

  bool operator==(const AnnotatedSentence&) const = default;
};

// Throws ValidationError if the sentence breaks a data-model invariant
// (empty, bad surface form, family inconsistent with country).
void validate_sentence(const AnnotatedSentence& sentence);

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<AnnotatedSentence> sentences,
                  std::string provenance = {});

  const std::vector<AnnotatedSentence>& sentences() const {
    return sentences_;
  }
  const std::string& provenance() const { return provenance_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  std::size_t token_count() const { return token_count_; }

  bool operator==(const Corpus& other) const {
    return sentences_ == other.sentences_;
  }

 private:
  std::vector<AnnotatedSentence> sentences_;
  std::string provenance_;
  std::size_t token_count_ = 0;
};

// Non-owning sequence of sentences. Metrics, bootstrap resamples and chunks
// all evaluate through this view so that resampling never copies tokens.
class CorpusView {
 public:
  CorpusView() = default;
  CorpusView(const Corpus& corpus);  // NOLINT: implicit by design of callers
  explicit CorpusView(std::vector<const AnnotatedSentence*> sentences);

  void push_back(const AnnotatedSentence* sentence);
  std::span<const AnnotatedSentence* const> sentences() const {
    return sentences_;
  }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  std::size_t token_count() const { return token_count_; }

 private:
  std::vector<const AnnotatedSentence*> sentences_;
  std::size_t token_count_ = 0;
};

struct Chunk {
  std::vector<AnnotatedSentence> sentences;
  std::size_t token_count = 0;
  Variety variety = Variety::kNative;

  CorpusView view() const;
};

// ---------------------------------------------------------------------------
// Ingestion and emission.

enum class CorpusFormat { kJsonl, kVertical };

// Picks a format from the file extension: ".vert"/".vrt" are vertical,
// everything else is JSONL.
CorpusFormat guess_format(const std::filesystem::path& path);

struct IngestOptions {
  // When set, POS tags outside the set are flagged on the token.
  const TagSet* tagset = nullptr;
  // Variety used for vertical files without a #variety header and JSONL
  // records without a "variety" field. Unset means the field is required.
  std::optional<Variety> default_variety;
};

Corpus ingest(const std::filesystem::path& path, CorpusFormat format,
              const IngestOptions& options = {});
Corpus ingest_jsonl(std::istream& in, const std::string& source,
                    const IngestOptions& options = {});
Corpus ingest_vertical(std::istream& in, const std::string& source,
                       const IngestOptions& options = {});

void write_jsonl(const Corpus& corpus, std::ostream& out);

// Rule tokenizer for raw text: whitespace split, lowercase, and drop tokens
// made only of punctuation.
std::vector<std::string> tokenize_raw(std::string_view text);

// ---------------------------------------------------------------------------
// Corpus operations.

Corpus shuffle(const Corpus& corpus, std::uint64_t seed);

struct ChunkingResult {
  std::vector<Chunk> chunks;
  std::size_t dropped_tokens = 0;
};

// Greedy fill: sentences are appended until the chunk reaches
// `target_size` tokens, then it closes. A trailing chunk below half the
// target is dropped. Throws ValidationError on mixed varieties.
ChunkingResult chunk_with_remainder(const Corpus& corpus,
                                    std::size_t target_size = 2000);
std::vector<Chunk> chunk(const Corpus& corpus, std::size_t target_size = 2000);

using ChunksByVariety = std::map<Variety, std::vector<Chunk>>;

// Down-samples every variety to the smallest variety's chunk count, drawing
// without replacement. Retained chunks keep their original relative order.
ChunksByVariety balance(const ChunksByVariety& chunks, std::uint64_t seed);

struct SentenceFilter {
  std::optional<Variety> variety;
  std::optional<std::string> country;
  std::optional<LanguageFamily> family;

  bool matches(const AnnotatedSentence& sentence) const;
};

Corpus filter(const Corpus& corpus, const SentenceFilter& predicate);
Corpus filter(const Corpus& corpus,
              const std::function<bool(const AnnotatedSentence&)>& predicate);

// Leading sentences until at least `tokens` tokens are taken.
Corpus take_tokens(const Corpus& corpus, std::size_t tokens);

// Concatenation, provenance joined with "+".
Corpus concat(std::span<const Corpus* const> parts);

}  // namespace varieties

#endif  // VARIETIES_CORPUS_H_
