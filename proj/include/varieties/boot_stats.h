#ifndef VARIETIES_BOOT_STATS_H_
#define VARIETIES_BOOT_STATS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "varieties/corpus.h"
#include "varieties/metrics.h"
#include "varieties/rng.h"

namespace varieties {

struct BootstrapConfig {
  std::size_t iterations = 1000;
  // Token target of every resample; 0 means the size of the corpus the
  // resample stands in for.
  std::size_t sample_tokens = 0;
  std::uint64_t seed = 0;
};

// Sum of pairwise absolute differences of the metric over N, NN and T.
double d_total(const MetricFn& metric, const CorpusView& n,
               const CorpusView& nn, const CorpusView& t);

// Draws whole sentences with replacement until the sample holds at least
// `target_tokens` tokens. Throws ValidationError on an empty pool.
CorpusView resample(std::span<const AnnotatedSentence* const> pool,
                    std::size_t target_tokens, Rng& rng);

struct BootstrapResult {
  std::string metric;
  double observed = 0.0;
  std::vector<double> series;  // ascending
  std::uint64_t seed = 0;
  // D_total test.
  double p_value = 0.0;
  // True when no resample reached the observed value; p_value is then 0
  // and the honest report is p < 1/iterations.
  bool p_below_resolution = false;
  // D_dif test: nearest-rank 2.5th and 97.5th percentiles.
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::optional<Variety> k;
  bool significant = false;

  std::size_t iterations() const { return series.size(); }
  // "0.0420" or "< 0.001".
  std::string p_display() const;
};

// Resamples N, NN and T from the pooled sentences. The pool is put in
// canonical content order first, so relabeling the three inputs changes
// nothing when their sizes agree. Significant iff p < 0.05.
BootstrapResult test_d_total(const MetricFn& metric, const CorpusView& n,
                             const CorpusView& nn, const CorpusView& t,
                             const BootstrapConfig& config,
                             std::string metric_name = {});

// NN when |f(N) - f(NN)| < |f(N) - f(T)| on the original corpora, T
// otherwise (ties included).
Variety choose_k(const MetricFn& metric, const CorpusView& n,
                 const CorpusView& nn, const CorpusView& t);

// Resamples each corpus separately and collects
// |f(N) - f(K)| - |f(NN) - f(T)|. Significant iff the low CI end is > 0.
BootstrapResult test_d_dif(const MetricFn& metric, const CorpusView& n,
                           const CorpusView& nn, const CorpusView& t,
                           const BootstrapConfig& config,
                           std::string metric_name = {});

// Nearest-rank percentile of an ascending series, q in (0, 1].
double nearest_rank(std::span<const double> sorted, double q);

struct TTestResult {
  double t = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;  // two-tailed
};

// Two-tailed p for a t statistic with df degrees of freedom.
double t_two_tailed_p(double t, double df);

// Throws ValidationError on length mismatch, fewer than 2 pairs, or
// zero-variance differences.
TTestResult paired_ttest(std::span<const double> a, std::span<const double> b);

// {metric, observed, iterations, p_value | ci, significant, seed}
nlohmann::json d_total_json(const BootstrapResult& result);
nlohmann::json d_dif_json(const BootstrapResult& result);
nlohmann::json ttest_json(const TTestResult& result);

}  // namespace varieties

#endif  // VARIETIES_BOOT_STATS_H_
