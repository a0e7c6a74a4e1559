#ifndef VARIETIES_METRICS_H_
#define VARIETIES_METRICS_H_

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "varieties/corpus.h"
#include "varieties/lexicons.h"

namespace varieties {

enum class Metric {
  kTtr,
  kMeanWordRank,
  kCollocationTypes,
  kTransitions,
  kPronouns,
};

inline constexpr std::array<Metric, 5> kAllMetrics = {
    Metric::kTtr, Metric::kMeanWordRank, Metric::kCollocationTypes,
    Metric::kTransitions, Metric::kPronouns};

std::string_view metric_name(Metric metric);  // "ttr", "mean_word_rank", ...
Metric parse_metric(std::string_view name);

struct MetricValue {
  Metric metric;
  double raw = 0.0;
  std::size_t basis = 0;  // tokens the value was computed over
};

// Distinct lemmas / tokens; the lemma falls back to the surface form.
MetricValue ttr(const CorpusView& corpus);

// Mean rank over tokens that are not function words and are in the rank
// list; basis counts those tokens only. Lookup is by surface form.
MetricValue mean_word_rank(const CorpusView& corpus, const RankList& ranks,
                           const WordList& function_words);

struct CollocationCounts {
  MetricValue types;  // raw = distinct idioms with at least one match
  std::map<std::string, std::size_t> token_counts;  // per matched idiom
};

CollocationCounts collocation_counts(const CorpusView& corpus,
                                     const PhraseList& idioms);
MetricValue collocation_types(const CorpusView& corpus,
                              const PhraseList& idioms);

// Marker matches / tokens. `markers` is used as given; pass the
// sentence-transition subset. Throws ValidationError on an empty list.
MetricValue transitions(const CorpusView& corpus, const PhraseList& markers);

// PRP and PRP$ tokens / tokens. Throws ValidationError on an untagged token.
MetricValue pronouns(const CorpusView& corpus);

// NN, NNS, NNP and NNPS tokens / tokens.
double noun_frequency(const CorpusView& corpus);

struct SizeCheck {
  bool ok = true;
  std::string diagnostic;
};

// Passes iff every pairwise token count differs by at most `tolerance`
// relative to the larger one. The diagnostic names the corpus farthest from
// the median.
SizeCheck check_sizes(const CorpusView& n, const CorpusView& nn,
                      const CorpusView& t, double tolerance = 0.01);

// Triples are ordered (N, T, NN) throughout.
inline constexpr std::array<Variety, 3> kTripleOrder = {
    Variety::kNative, Variety::kTranslated, Variety::kNonNative};

struct MetricTriple {
  std::array<double, 3> raw{};
  std::array<double, 3> normalized{};
};

// Total-sum normalization. Throws ValidationError for a negative value or
// an all-zero triple.
MetricTriple normalize_triple(const std::array<double, 3>& raw);

// A metric bound to its resources, for repeated evaluation (bootstrap).
using MetricFn = std::function<MetricValue(const CorpusView&)>;
MetricFn bind_metric(Metric metric, const ResourceBundle& resources);

struct MetricRow {
  Metric metric;
  MetricTriple triple;
  std::string significance;  // filled in by the bootstrap stage
};

// All five metrics on one set of N/NN/T texts. Throws ValidationError when
// the size check fails unless `allow_unequal` is set.
std::vector<MetricRow> compute_metrics(const CorpusView& n,
                                       const CorpusView& nn,
                                       const CorpusView& t,
                                       const ResourceBundle& resources,
                                       bool allow_unequal = false);

// metric,raw_N,raw_T,raw_NN,norm_N,norm_T,norm_NN,significance
void write_metric_table(std::ostream& out, const std::vector<MetricRow>& rows);

}  // namespace varieties

#endif  // VARIETIES_METRICS_H_
