#include "varieties/metrics.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <set>
#include <unordered_set>

#include "varieties/error.h"
#include "varieties/features.h"

namespace varieties {
namespace {

std::vector<std::string> surfaces(const AnnotatedSentence& s) {
  std::vector<std::string> out;
  out.reserve(s.tokens.size());
  for (const Token& t : s.tokens) out.push_back(t.surface);
  return out;
}

const std::string& tag_of(const Token& token) {
  if (!token.pos) {
    throw ValidationError("token '" + token.surface + "' has no POS tag");
  }
  return *token.pos;
}

double ratio(std::size_t count, std::size_t total) {
  return static_cast<double>(count) / static_cast<double>(total);
}

void require_tokens(const CorpusView& corpus, std::string_view metric) {
  if (corpus.token_count() == 0) {
    throw ValidationError(std::string(metric) + " of an empty corpus");
  }
}

}  // namespace

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kTtr: return "ttr";
    case Metric::kMeanWordRank: return "mean_word_rank";
    case Metric::kCollocationTypes: return "collocation_types";
    case Metric::kTransitions: return "transitions";
    case Metric::kPronouns: return "pronouns";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (metric_name(m) == name) return m;
  }
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

MetricValue ttr(const CorpusView& corpus) {
  require_tokens(corpus, "ttr");
  std::unordered_set<std::string_view> types;
  for (const AnnotatedSentence* s : corpus.sentences()) {
    for (const Token& t : s->tokens) types.insert(t.lemma_or_surface());
  }
  return {Metric::kTtr, ratio(types.size(), corpus.token_count()),
          corpus.token_count()};
}

MetricValue mean_word_rank(const CorpusView& corpus, const RankList& ranks,
                           const WordList& function_words) {
  double sum = 0;
  std::size_t included = 0;
  for (const AnnotatedSentence* s : corpus.sentences()) {
    for (const Token& t : s->tokens) {
      if (function_words.contains(t.surface)) continue;
      if (const auto r = ranks.rank(t.surface)) {
        sum += static_cast<double>(*r);
        ++included;
      }
    }
  }
  if (included == 0) {
    throw ValidationError(
        "mean word rank: no token is both ranked and a content word");
  }
  return {Metric::kMeanWordRank, sum / static_cast<double>(included),
          included};
}

CollocationCounts collocation_counts(const CorpusView& corpus,
                                     const PhraseList& idioms) {
  CollocationCounts out;
  for (const AnnotatedSentence* s : corpus.sentences()) {
    const auto toks = surfaces(*s);
    for (const PhraseMatch& m : match_phrases(toks, idioms)) {
      ++out.token_counts[idioms.entries()[m.phrase].text()];
    }
  }
  out.types = {Metric::kCollocationTypes,
               static_cast<double>(out.token_counts.size()),
               corpus.token_count()};
  return out;
}

MetricValue collocation_types(const CorpusView& corpus,
                              const PhraseList& idioms) {
  return collocation_counts(corpus, idioms).types;
}

MetricValue transitions(const CorpusView& corpus, const PhraseList& markers) {
  if (markers.size() == 0) {
    throw ValidationError("transitions: empty marker list");
  }
  require_tokens(corpus, "transitions");
  std::size_t matches = 0;
  for (const AnnotatedSentence* s : corpus.sentences()) {
    matches += match_phrases(surfaces(*s), markers).size();
  }
  return {Metric::kTransitions, ratio(matches, corpus.token_count()),
          corpus.token_count()};
}

MetricValue pronouns(const CorpusView& corpus) {
  require_tokens(corpus, "pronouns");
  std::size_t count = 0;
  for (const AnnotatedSentence* s : corpus.sentences()) {
    for (const Token& t : s->tokens) {
      const std::string& tag = tag_of(t);
      count += tag == "PRP" || tag == "PRP$";
    }
  }
  return {Metric::kPronouns, ratio(count, corpus.token_count()),
          corpus.token_count()};
}

double noun_frequency(const CorpusView& corpus) {
  require_tokens(corpus, "noun frequency");
  std::size_t count = 0;
  for (const AnnotatedSentence* s : corpus.sentences()) {
    for (const Token& t : s->tokens) {
      const std::string& tag = tag_of(t);
      count += tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS";
    }
  }
  return ratio(count, corpus.token_count());
}

SizeCheck check_sizes(const CorpusView& n, const CorpusView& nn,
                      const CorpusView& t, double tolerance) {
  const std::array<std::pair<std::string_view, std::size_t>, 3> sizes = {{
      {"N", n.token_count()}, {"NN", nn.token_count()}, {"T", t.token_count()}}};
  SizeCheck check;
  for (const auto& [name, size] : sizes) {
    if (size == 0) {
      check.ok = false;
      check.diagnostic = std::string(name) + " is empty";
      return check;
    }
  }
  bool within = true;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a + 1; b < 3; ++b) {
      const double hi = static_cast<double>(
          std::max(sizes[a].second, sizes[b].second));
      const double lo = static_cast<double>(
          std::min(sizes[a].second, sizes[b].second));
      if (hi - lo > tolerance * hi) within = false;
    }
  }
  if (within) return check;
  std::array<std::size_t, 3> sorted = {sizes[0].second, sizes[1].second,
                                       sizes[2].second};
  std::sort(sorted.begin(), sorted.end());
  const double median = static_cast<double>(sorted[1]);
  std::size_t worst = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (std::abs(static_cast<double>(sizes[i].second) - median) >
        std::abs(static_cast<double>(sizes[worst].second) - median)) {
      worst = i;
    }
  }
  check.ok = false;
  check.diagnostic = std::string(sizes[worst].first) + " has " +
                     std::to_string(sizes[worst].second) +
                     " tokens; sizes (N, NN, T) = (" +
                     std::to_string(sizes[0].second) + ", " +
                     std::to_string(sizes[1].second) + ", " +
                     std::to_string(sizes[2].second) + ") differ by more than " +
                     format_double(tolerance * 100) + "%";
  return check;
}

MetricTriple normalize_triple(const std::array<double, 3>& raw) {
  double sum = 0;
  for (double v : raw) {
    if (!(v >= 0) || !std::isfinite(v)) {
      throw ValidationError("metric values must be finite and non-negative");
    }
    sum += v;
  }
  if (sum == 0) throw ValidationError("cannot normalize an all-zero triple");
  MetricTriple t;
  t.raw = raw;
  for (std::size_t i = 0; i < 3; ++i) t.normalized[i] = raw[i] / sum;
  return t;
}

MetricFn bind_metric(Metric metric, const ResourceBundle& resources) {
  switch (metric) {
    case Metric::kTtr:
      return [](const CorpusView& c) { return ttr(c); };
    case Metric::kMeanWordRank:
      return [&resources](const CorpusView& c) {
        return mean_word_rank(c, resources.word_ranks,
                              resources.function_words);
      };
    case Metric::kCollocationTypes:
      return [&resources](const CorpusView& c) {
        return collocation_types(c, resources.idioms);
      };
    case Metric::kTransitions: {
      auto markers = std::make_shared<PhraseList>(
          resources.cohesive_markers.with_category(kSentenceTransition));
      return [markers](const CorpusView& c) {
        return transitions(c, *markers);
      };
    }
    case Metric::kPronouns:
      return [](const CorpusView& c) { return pronouns(c); };
  }
  throw ValidationError("unknown metric");
}

std::vector<MetricRow> compute_metrics(const CorpusView& n,
                                       const CorpusView& nn,
                                       const CorpusView& t,
                                       const ResourceBundle& resources,
                                       bool allow_unequal) {
  const SizeCheck sizes = check_sizes(n, nn, t);
  if (!sizes.ok && !allow_unequal) {
    throw ValidationError("unequal corpus sizes: " + sizes.diagnostic);
  }
  std::vector<MetricRow> rows;
  for (Metric m : kAllMetrics) {
    const MetricFn fn = bind_metric(m, resources);
    rows.push_back({m, normalize_triple({fn(n).raw, fn(t).raw, fn(nn).raw}),
                    ""});
  }
  return rows;
}

void write_metric_table(std::ostream& out,
                        const std::vector<MetricRow>& rows) {
  out << "metric,raw_N,raw_T,raw_NN,norm_N,norm_T,norm_NN,significance\n";
  for (const MetricRow& r : rows) {
    out << metric_name(r.metric);
    for (double v : r.triple.raw) out << ',' << format_double(v);
    for (double v : r.triple.normalized) out << ',' << format_double(v);
    out << ',' << csv_field(r.significance) << '\n';
  }
}

}  // namespace varieties
