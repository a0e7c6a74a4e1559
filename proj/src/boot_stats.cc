#include "varieties/boot_stats.h"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <tuple>

#include "varieties/error.h"
#include "varieties/features.h"
#include "varieties/rng.h"

namespace varieties {
namespace {

constexpr double kAlpha = 0.05;

// Strict weak order on sentence content.
bool content_less(const AnnotatedSentence* a, const AnnotatedSentence* b) {
  return std::lexicographical_compare(
      a->tokens.begin(), a->tokens.end(), b->tokens.begin(), b->tokens.end(),
      [](const Token& x, const Token& y) {
        return std::tie(x.surface, x.pos, x.lemma) <
               std::tie(y.surface, y.pos, y.lemma);
      });
}

void check_config(const BootstrapConfig& config) {
  if (config.iterations == 0) {
    throw ValidationError("bootstrap needs at least one iteration");
  }
}

void check_inputs(const CorpusView& n, const CorpusView& nn,
                  const CorpusView& t) {
  if (n.empty() || nn.empty() || t.empty()) {
    throw ValidationError("bootstrap needs three nonempty corpora");
  }
}

std::size_t target_for(const BootstrapConfig& config,
                       const CorpusView& corpus) {
  return config.sample_tokens > 0 ? config.sample_tokens
                                  : corpus.token_count();
}

std::vector<const AnnotatedSentence*> pointers(const CorpusView& c) {
  return {c.sentences().begin(), c.sentences().end()};
}

}  // namespace

double d_total(const MetricFn& metric, const CorpusView& n,
               const CorpusView& nn, const CorpusView& t) {
  const double a = metric(n).raw, b = metric(nn).raw, c = metric(t).raw;
  return std::abs(a - b) + std::abs(a - c) + std::abs(b - c);
}

CorpusView resample(std::span<const AnnotatedSentence* const> pool,
                    std::size_t target_tokens, Rng& rng) {
  if (pool.empty()) throw ValidationError("cannot resample an empty corpus");
  CorpusView sample;
  while (sample.token_count() < target_tokens || sample.empty()) {
    sample.push_back(pool[rng.below(pool.size())]);
  }
  return sample;
}

std::string BootstrapResult::p_display() const {
  if (p_below_resolution) {
    return "< " + format_double(1.0 / static_cast<double>(iterations()));
  }
  return format_double(p_value);
}

BootstrapResult test_d_total(const MetricFn& metric, const CorpusView& n,
                             const CorpusView& nn, const CorpusView& t,
                             const BootstrapConfig& config,
                             std::string metric_name) {
  check_config(config);
  check_inputs(n, nn, t);
  std::vector<const AnnotatedSentence*> pool;
  for (const CorpusView* c : {&n, &nn, &t}) {
    pool.insert(pool.end(), c->sentences().begin(), c->sentences().end());
  }
  std::stable_sort(pool.begin(), pool.end(), content_less);

  BootstrapResult result;
  result.metric = std::move(metric_name);
  result.seed = config.seed;
  result.observed = d_total(metric, n, nn, t);
  result.series.reserve(config.iterations);
  std::size_t at_least = 0;
  for (std::size_t j = 0; j < config.iterations; ++j) {
    Rng rng(derive_seed(config.seed, j));
    const CorpusView sn = resample(pool, target_for(config, n), rng);
    const CorpusView snn = resample(pool, target_for(config, nn), rng);
    const CorpusView st = resample(pool, target_for(config, t), rng);
    const double d = d_total(metric, sn, snn, st);
    at_least += d >= result.observed;
    result.series.push_back(d);
  }
  std::sort(result.series.begin(), result.series.end());
  result.p_value =
      static_cast<double>(at_least) / static_cast<double>(config.iterations);
  result.p_below_resolution = at_least == 0;
  result.significant = result.p_value < kAlpha;
  return result;
}

Variety choose_k(const MetricFn& metric, const CorpusView& n,
                 const CorpusView& nn, const CorpusView& t) {
  const double fn = metric(n).raw, fnn = metric(nn).raw, ft = metric(t).raw;
  return std::abs(fn - fnn) < std::abs(fn - ft) ? Variety::kNonNative
                                                : Variety::kTranslated;
}

double nearest_rank(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("percentile of an empty series");
  if (!(q > 0 && q <= 1)) throw ValidationError("percentile out of (0, 1]");
  // ceil(q * n) in integer arithmetic at 1e-6 resolution, so 0.025 * 1000
  // lands on 25 exactly.
  const auto scaled = static_cast<std::uint64_t>(std::llround(q * 1e6));
  const std::uint64_t rank =
      (scaled * sorted.size() + 999999) / 1000000;
  return sorted[std::max<std::uint64_t>(rank, 1) - 1];
}

BootstrapResult test_d_dif(const MetricFn& metric, const CorpusView& n,
                           const CorpusView& nn, const CorpusView& t,
                           const BootstrapConfig& config,
                           std::string metric_name) {
  check_config(config);
  check_inputs(n, nn, t);
  BootstrapResult result;
  result.metric = std::move(metric_name);
  result.seed = config.seed;
  result.k = choose_k(metric, n, nn, t);
  const bool k_is_nn = *result.k == Variety::kNonNative;
  {
    const double fn = metric(n).raw, fnn = metric(nn).raw,
                 ft = metric(t).raw;
    result.observed = std::abs(fn - (k_is_nn ? fnn : ft)) - std::abs(fnn - ft);
  }
  const auto pn = pointers(n), pnn = pointers(nn), pt = pointers(t);
  result.series.reserve(config.iterations);
  for (std::size_t j = 0; j < config.iterations; ++j) {
    Rng rng(derive_seed(config.seed, j));
    const double fn = metric(resample(pn, target_for(config, n), rng)).raw;
    const double fnn = metric(resample(pnn, target_for(config, nn), rng)).raw;
    const double ft = metric(resample(pt, target_for(config, t), rng)).raw;
    result.series.push_back(std::abs(fn - (k_is_nn ? fnn : ft)) -
                            std::abs(fnn - ft));
  }
  std::sort(result.series.begin(), result.series.end());
  result.ci_low = nearest_rank(result.series, 0.025);
  result.ci_high = nearest_rank(result.series, 0.975);
  result.significant = result.ci_low > 0;
  return result;
}

double t_two_tailed_p(double t, double df) {
  if (!(df > 0)) throw ValidationError("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  // P(|T| > t) = I_{df / (df + t^2)}(df / 2, 1 / 2).
  return boost::math::ibeta(df / 2, 0.5, df / (df + t * t));
}

TTestResult paired_ttest(std::span<const double> a,
                         std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("paired t-test needs equal-length series (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw ValidationError("paired t-test needs 2+ pairs");
  const auto n = static_cast<double>(a.size());
  double mean = 0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1));
  if (!(sd > 0)) {
    throw ValidationError("paired differences have zero variance");
  }
  TTestResult r;
  r.t = mean / (sd / std::sqrt(n));
  r.df = a.size() - 1;
  r.p_value = t_two_tailed_p(r.t, static_cast<double>(r.df));
  return r;
}

nlohmann::json d_total_json(const BootstrapResult& result) {
  nlohmann::json j;
  j["metric"] = result.metric;
  j["test"] = "d_total";
  j["observed"] = result.observed;
  j["iterations"] = result.iterations();
  j["p_value"] = result.p_value;
  j["p_display"] = result.p_display();
  j["significant"] = result.significant;
  j["seed"] = result.seed;
  return j;
}

nlohmann::json d_dif_json(const BootstrapResult& result) {
  nlohmann::json j;
  j["metric"] = result.metric;
  j["test"] = "d_dif";
  j["observed"] = result.observed;
  j["iterations"] = result.iterations();
  j["ci"] = {result.ci_low, result.ci_high};
  if (result.k) j["k"] = std::string(variety_name(*result.k));
  j["significant"] = result.significant;
  j["seed"] = result.seed;
  return j;
}

nlohmann::json ttest_json(const TTestResult& result) {
  return {{"t", result.t}, {"df", result.df}, {"p_value", result.p_value}};
}

}  // namespace varieties
