#ifndef VARIETIES_LM_H_
#define VARIETIES_LM_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "varieties/corpus.h"
#include "varieties/lexicons.h"

namespace varieties {

inline constexpr std::string_view kBeginTag = "<s>";
inline constexpr std::string_view kEndTag = "</s>";
// log10 probability written for context-only symbols.
inline constexpr double kNeverPredicted = -99.0;

using TagSentence = std::vector<std::string>;

// Tag sequences of a corpus. Throws ValidationError on an untagged token.
std::vector<TagSentence> tag_sentences(const CorpusView& corpus);

// One space-separated tag sentence per line; blank lines are skipped.
std::vector<TagSentence> read_tag_sentences(std::istream& in);

using Gram = std::vector<std::uint32_t>;

struct GramHash {
  std::size_t operator()(const Gram& g) const;
};

// Counts over sentences padded with (order - 1) begin markers and one end
// marker, with symbol ids from the model vocabulary.
struct NgramCounts {
  int order = 0;
  // Index m - 1 holds the m-grams.
  std::vector<std::unordered_map<Gram, std::uint64_t, GramHash>> raw;
  // Kneser-Ney counts: raw at the top order and for grams starting with the
  // begin marker, otherwise the number of distinct left extensions.
  std::vector<std::unordered_map<Gram, std::uint64_t, GramHash>> adjusted;
  // n_1..n_4 of adjusted counts per order, over grams that can be
  // predicted (last symbol is not the begin marker).
  std::vector<std::array<std::uint64_t, 4>> count_of_counts;
};

struct Discounts {
  std::array<double, 3> d{};  // counts 1, 2, 3+
  bool fallback = false;

  double for_count(std::uint64_t count) const {
    return count == 0 ? 0.0 : d[std::min<std::uint64_t>(count, 3) - 1];
  }
};

inline constexpr double kFallbackDiscount = 0.5;

// D_k = k - (k + 1) Y n_{k+1} / n_k with Y = n_1 / (n_1 + 2 n_2). Returns
// 0.5 for every k, flagged, when n_1 or n_2 is zero or some D_k falls
// outside (0, k).
Discounts estimate_discounts(const std::array<std::uint64_t, 4>& n);

// Interpolated modified Kneser-Ney model stored as ARPA-style tables: every
// seen n-gram carries its interpolated log10 probability and, if it is a
// context, the log10 interpolation weight of that context.
class KneserNeyModel {
 public:
  struct Entry {
    double log10_prob = 0.0;
    double log10_backoff = 0.0;
    bool has_backoff = false;
  };

  int order() const { return order_; }
  const std::vector<std::string>& symbols() const { return symbols_; }
  std::optional<std::uint32_t> id(std::string_view symbol) const;
  // Predictable symbols: every unigram except the begin marker.
  std::vector<std::uint32_t> vocabulary() const;

  // log10 P(word | context) by backoff over the tables; the context is
  // oldest first and may be longer than order - 1. Returns nullopt when the
  // word is not a unigram of the model (OOV).
  std::optional<double> log10_prob(std::span<const std::uint32_t> context,
                                   std::uint32_t word) const;
  std::optional<double> log10_prob(std::span<const std::string> context,
                                   std::string_view word) const;

  const std::vector<Discounts>& discounts() const { return discounts_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<std::unordered_map<Gram, Entry, GramHash>>& tables()
      const {
    return tables_;
  }

 private:
  friend KneserNeyModel train_lm(std::span<const TagSentence>, const TagSet&,
                                 int);
  friend KneserNeyModel read_arpa(std::istream&, const std::string&);

  std::uint32_t intern(std::string_view symbol);

  int order_ = 0;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::unordered_map<Gram, Entry, GramHash>> tables_;
  std::vector<Discounts> discounts_;
  std::vector<std::string> warnings_;
};

// Counting half of train_lm, exposed for inspection. Symbol ids follow
// `symbols`, which must start with the begin and end markers.
NgramCounts count_ngrams(std::span<const TagSentence> sentences,
                         const std::unordered_map<std::string, std::uint32_t>&
                             ids,
                         int order);

// The vocabulary is the tagset plus the end marker. Throws ValidationError
// on an out-of-tagset tag (naming it and its position), an empty corpus or
// an order outside 1..9.
KneserNeyModel train_lm(std::span<const TagSentence> sentences,
                        const TagSet& tagset, int order = 5);

struct PplOptions {
  // Score the end marker of every sentence.
  bool score_end = true;
};

struct PositionScore {
  std::string symbol;
  std::optional<double> log10_prob;  // nullopt: excluded as OOV
};

// Per-position scores. The history starts with order - 1 begin markers;
// an OOV position is excluded and the history restarts empty after it.
std::vector<PositionScore> score_sentence(const KneserNeyModel& model,
                                          const TagSentence& sentence,
                                          const PplOptions& options = {});

struct ChunkPerplexity {
  std::size_t first_sentence = 0;
  std::size_t sentences = 0;
  std::size_t scored = 0;
  std::size_t excluded = 0;
  double log10_sum = 0.0;
  double perplexity = 0.0;
  bool short_chunk = false;  // fewer sentences than requested
};

struct PerplexityReport {
  double perplexity = 0.0;  // 10^(-log10_sum / scored)
  double log10_sum = 0.0;
  std::size_t scored = 0;
  std::size_t excluded = 0;
  std::size_t positions = 0;
  bool end_scored = true;
  std::vector<ChunkPerplexity> chunks;
};

// Throws ValidationError on an empty test set or when nothing is scored.
PerplexityReport ppl(const KneserNeyModel& model,
                     std::span<const TagSentence> sentences,
                     const PplOptions& options = {});

// Consecutive chunks of `chunk_sentences`; a short final chunk is kept and
// flagged.
PerplexityReport ppl_by_chunks(const KneserNeyModel& model,
                               std::span<const TagSentence> sentences,
                               std::size_t chunk_sentences = 100,
                               const PplOptions& options = {});

void write_arpa(const KneserNeyModel& model, std::ostream& out);
void write_arpa(const KneserNeyModel& model,
                const std::filesystem::path& path);
// Throws ParseError on malformed headers, sections or counts.
KneserNeyModel read_arpa(std::istream& in, const std::string& source);
KneserNeyModel read_arpa(const std::filesystem::path& path);

}  // namespace varieties

#endif  // VARIETIES_LM_H_
