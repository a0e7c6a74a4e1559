#ifndef VARIETIES_FEATURES_H_
#define VARIETIES_FEATURES_H_

#include <cstddef>
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

enum class FeatureFamily {
  kFunctionWords,     // FW
  kPosTrigrams,       // POS3
  kPositionalTokens,  // POSTOK
  kCohesiveMarkers,   // COH
};

std::string_view family_code(FeatureFamily family);

struct FeatureId {
  FeatureFamily family;
  // Word, "TAG1_TAG2_TAG3", "first:the" or a marker phrase.
  std::string key;

  std::string str() const;  // "FW:the"
  auto operator<=>(const FeatureId&) const = default;
};

// Sparse per-token frequencies. Only features with a nonzero count are
// stored and every value is count / token_count.
struct FeatureVector {
  std::map<FeatureId, double> values;
  std::size_t token_count = 0;

  double get(const FeatureId& id) const;
};

// The ordered dimensions of one feature family.
class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(FeatureFamily family, std::vector<std::string> keys,
               std::string provenance);

  FeatureFamily family() const { return family_; }
  const std::vector<std::string>& keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }
  const std::string& provenance() const { return provenance_; }
  std::optional<std::size_t> index_of(std::string_view key) const;
  FeatureId id(std::size_t i) const { return {family_, keys_[i]}; }

  // Marker phrases of a COH space, rebuilt from its keys.
  const PhraseList& phrases() const { return phrases_; }

 private:
  FeatureFamily family_ = FeatureFamily::kFunctionWords;
  std::vector<std::string> keys_;
  std::string provenance_;
  std::unordered_map<std::string, std::size_t> index_;
  PhraseList phrases_;
};

FeatureVector extract_fw(const CorpusView& chunk, const WordList& fw);

// Within-sentence trigrams only, no padding. Throws ValidationError if a
// token has no POS tag.
FeatureVector extract_pos3(const CorpusView& chunk);

// Raw (first, second, third, penultimate, last) events. Short sentences
// emit one event per position, so a token can fill several positions.
std::vector<std::string> positional_events(
    std::span<const Token> sentence);

// Positional-token frequencies restricted to `vocab`.
FeatureVector extract_postok(const CorpusView& chunk,
                             const FeatureSpace& vocab);

FeatureVector extract_coh(const CorpusView& chunk, const PhraseList& markers);

FeatureSpace function_word_space(const WordList& fw);
FeatureSpace cohesive_marker_space(const PhraseList& markers);

// Top-k trigrams by count over `training`, ties broken lexicographically.
FeatureSpace select_top_pos3(std::span<const Chunk> training,
                             std::size_t k = 3000);

// All positional events seen at least `min_count` times in `training`,
// ordered by key.
FeatureSpace select_postok_vocab(std::span<const Chunk> training,
                                 std::size_t min_count = 5);

// Sparse vector of `chunk` for the family of `space`, projected on it.
FeatureVector extract(const CorpusView& chunk, const FeatureSpace& space);

// Dense concatenation over `spaces`, in declared order.
std::vector<double> vectorize(const CorpusView& chunk,
                              std::span<const FeatureSpace> spaces);

std::size_t total_dimension(std::span<const FeatureSpace> spaces);
std::vector<FeatureId> feature_ids(std::span<const FeatureSpace> spaces);

// A feature-set row such as "FW+POS+POSTOK".
struct FeatureSetSpec {
  bool fw = false;
  bool pos3 = false;
  bool postok = false;
  bool coh = false;
  std::size_t pos3_top_k = 3000;
  std::size_t postok_min_count = 5;

  bool needs_pos() const { return pos3; }
  std::string name() const;
};

// Accepts families joined by '+': FW, POS (or POS3), POSTOK, COH.
FeatureSetSpec parse_feature_set(std::string_view text);

// Builds the spaces of `spec` from training chunks only. FW and COH come
// from the resources, POS3 and POSTOK are selected on `training`.
std::vector<FeatureSpace> build_spaces(const FeatureSetSpec& spec,
                                       std::span<const Chunk> training,
                                       const ResourceBundle& resources);

// `chunk_id,feature,value` rows for every stored value.
void write_sparse_csv(std::span<const FeatureVector> rows,
                      std::ostream& out);
// Header `chunk_id,<feature>...` then one dense row per chunk.
void write_dense_csv(std::span<const std::vector<double>> rows,
                     std::span<const FeatureSpace> spaces, std::ostream& out);

// Shortest round-trip decimal form.
std::string format_double(double value);
// RFC 4180 quoting when the field needs it.
std::string csv_field(std::string_view field);

}  // namespace varieties

#endif  // VARIETIES_FEATURES_H_
