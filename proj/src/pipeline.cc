#include "varieties/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "varieties/boot_stats.h"
#include "varieties/clustering.h"
#include "varieties/error.h"
#include "varieties/features.h"
#include "varieties/lexicons.h"
#include "varieties/lm.h"
#include "varieties/metrics.h"
#include "varieties/rng.h"
#include "varieties/svm.h"

namespace varieties {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  std::size_t out = 0;
  const char* end = value.data() + value.size();
  const auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw ValidationError("config: " + key + " must be a non-negative integer, got '" +
                          value + "'");
  }
  return out;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string env_name(const std::string& key) {
  std::string out = "VARIETIES_";
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "resources",       "corpus.N",          "corpus.NN",
      "corpus.T",        "out",               "seed",
      "chunk_tokens",    "cv_folds",          "bootstrap_iterations",
      "metrics_tokens",  "feature_sets",      "cluster_features",
      "lm_order",        "lm_train_tokens",   "lm_test_sentences",
      "lm_country_sentences", "lm_chunk_sentences"};
  return keys;
}

void apply_key(PipelineConfig& c, const std::string& key,
               const std::string& value, const fs::path& base) {
  auto path = [&] { return (base / value).lexically_normal(); };
  if (key == "resources") {
    c.resources = path();
  } else if (key.rfind("corpus.", 0) == 0) {
    const auto v = parse_variety(key.substr(7));
    if (!v) throw ValidationError("config: unknown variety in key " + key);
    c.corpora[*v] = path();
  } else if (key == "out") {
    c.out = path();
  } else if (key == "seed") {
    c.seed = parse_count(key, value);
  } else if (key == "chunk_tokens") {
    c.chunk_tokens = parse_count(key, value);
  } else if (key == "cv_folds") {
    c.cv_folds = parse_count(key, value);
  } else if (key == "bootstrap_iterations") {
    c.bootstrap_iterations = parse_count(key, value);
  } else if (key == "metrics_tokens") {
    if (value == "auto") {
      c.metrics_tokens.reset();
    } else {
      c.metrics_tokens = parse_count(key, value);
    }
  } else if (key == "feature_sets") {
    c.feature_sets = split_list(value);
  } else if (key == "cluster_features") {
    c.cluster_features = value;
  } else if (key == "lm_order") {
    c.lm_order = static_cast<int>(parse_count(key, value));
  } else if (key == "lm_train_tokens") {
    c.lm_train_tokens = parse_count(key, value);
  } else if (key == "lm_test_sentences") {
    c.lm_test_sentences = parse_count(key, value);
  } else if (key == "lm_country_sentences") {
    c.lm_country_sentences = parse_count(key, value);
  } else if (key == "lm_chunk_sentences") {
    c.lm_chunk_sentences = parse_count(key, value);
  } else {
    throw ValidationError("config: unknown key '" + key + "'");
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string percent(double accuracy) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * accuracy);
  return buf;
}

// ---------------------------------------------------------------------------
// Stage bookkeeping.

// Buffers a stage's files and commits them together, so a failure midway
// leaves the previous outputs untouched.
class StageWriter {
 public:
  StageWriter(const PipelineConfig& config, std::string name, std::ostream& log)
      : dir_(config.out / name),
        name_(std::move(name)),
        log_(log),
        start_(std::chrono::steady_clock::now()) {}

  void add(const std::string& file, std::string contents) {
    files_[file] = std::move(contents);
  }

  void warn(const std::string& message) {
    log_ << "[" << name_ << "] warning: " << message << '\n';
    warnings_.push_back(message);
  }

  void commit() {
    fs::create_directories(dir_);
    json inventory = json::array();
    for (const auto& [file, contents] : files_) {
      write_file_atomic(dir_ / file, contents);
      inventory.push_back({{"path", file},
                           {"sha256", sha256_hex(contents)},
                           {"bytes", contents.size()}});
      log_ << "[" << name_ << "] wrote " << (dir_ / file).string() << '\n';
    }
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start_)
                               .count();
    write_file_atomic(dir_ / "timing.json",
                      json{{"seconds", seconds}}.dump(2) + "\n");
    const json stage = {
        {"stage", name_}, {"files", inventory}, {"warnings", warnings_}};
    write_file_atomic(dir_ / "stage.json", stage.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::string name_;
  std::ostream& log_;
  std::chrono::steady_clock::time_point start_;
  std::map<std::string, std::string> files_;
  std::vector<std::string> warnings_;
};

json read_stage_record(const PipelineConfig& config, std::string_view stage) {
  const fs::path record = config.out / stage / "stage.json";
  if (!fs::exists(record)) {
    throw ValidationError("missing output of stage '" + std::string(stage) +
                          "' (" + record.string() + "); run `varieties " +
                          std::string(stage) + "` first");
  }
  return json::parse(read_file(record));
}

// Ingested corpora, indexed by variety.
std::map<Variety, Corpus> load_ingested(const PipelineConfig& config,
                                        const TagSet& tagset) {
  read_stage_record(config, "ingest");
  std::map<Variety, Corpus> out;
  IngestOptions options;
  options.tagset = &tagset;
  for (Variety v : kAllVarieties) {
    const fs::path path =
        config.out / "ingest" / (std::string(variety_name(v)) + ".jsonl");
    if (!fs::exists(path)) {
      throw ValidationError("missing output of stage 'ingest' (" +
                            path.string() + "); run `varieties ingest` first");
    }
    options.default_variety = v;
    out.emplace(v, ingest(path, CorpusFormat::kJsonl, options));
  }
  return out;
}

std::size_t type_count(const Corpus& corpus) {
  std::set<std::string> types;
  for (const auto& s : corpus.sentences()) {
    for (const auto& t : s.tokens) types.insert(t.surface);
  }
  return types.size();
}

std::vector<Chunk> chunks_of(const std::map<Variety, Corpus>& corpora,
                             const PipelineConfig& config,
                             std::vector<int>& labels) {
  ChunksByVariety by_variety;
  for (const auto& [v, corpus] : corpora) {
    by_variety[v] = chunk(corpus, config.chunk_tokens);
  }
  const ChunksByVariety balanced = balance(by_variety, config.seed);
  std::vector<Chunk> out;
  labels.clear();
  for (const auto& [v, chunks] : balanced) {
    for (const Chunk& c : chunks) {
      out.push_back(c);
      labels.push_back(static_cast<int>(v));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stages.

void stage_ingest(const PipelineConfig& config, std::ostream& log) {
  StageWriter w(config, "ingest", log);
  const ResourceBundle res = load_resources(config.resources);
  std::ostringstream summary;
  summary << "variety,sentences,tokens,types,countries\n";
  for (Variety v : kAllVarieties) {
    const fs::path& path = config.corpora.at(v);
    IngestOptions options;
    options.tagset = &res.tagset;
    options.default_variety = v;
    const Corpus corpus = ingest(path, guess_format(path), options);
    if (corpus.empty()) {
      throw ValidationError(path.string() + ": no sentences");
    }
    std::set<std::string> countries;
    std::size_t out_of_tagset = 0;
    for (const auto& s : corpus.sentences()) {
      if (s.variety != v) {
        throw ValidationError(path.string() + ": holds " +
                              std::string(variety_name(s.variety)) +
                              " sentences but is configured as corpus." +
                              std::string(variety_name(v)));
      }
      if (s.country) countries.insert(*s.country);
      for (const auto& t : s.tokens) out_of_tagset += t.out_of_tagset;
    }
    if (out_of_tagset > 0) {
      w.warn(std::string(variety_name(v)) + ": " +
             std::to_string(out_of_tagset) + " tokens carry out-of-tagset POS");
    }
    std::ostringstream jsonl;
    write_jsonl(corpus, jsonl);
    w.add(std::string(variety_name(v)) + ".jsonl", jsonl.str());
    std::string country_list;
    for (const auto& c : countries) {
      country_list += (country_list.empty() ? "" : " ") + c;
    }
    summary << variety_name(v) << ',' << corpus.size() << ','
            << corpus.token_count() << ',' << type_count(corpus) << ','
            << country_list << '\n';
  }
  w.add("summary.csv", summary.str());
  w.commit();
}

struct Pair {
  const char* name;
  std::vector<Variety> varieties;
};

const std::vector<Pair>& classification_pairs() {
  static const std::vector<Pair> pairs = {
      {"N-NN", {Variety::kNative, Variety::kNonNative}},
      {"N-T", {Variety::kNative, Variety::kTranslated}},
      {"NN-T", {Variety::kNonNative, Variety::kTranslated}},
      {"3-way",
       {Variety::kNative, Variety::kNonNative, Variety::kTranslated}}};
  return pairs;
}

json varieties_json(std::span<const int> labels) {
  json out = json::array();
  for (int l : labels) {
    out.push_back(std::string(variety_name(static_cast<Variety>(l))));
  }
  return out;
}

void stage_classify(const PipelineConfig& config, std::ostream& log) {
  StageWriter w(config, "classify", log);
  const ResourceBundle res = load_resources(config.resources);
  const auto corpora = load_ingested(config, res.tagset);
  std::vector<FeatureSetSpec> specs;
  for (const auto& name : config.feature_sets) {
    specs.push_back(parse_feature_set(name));
  }
  std::vector<int> all_labels;
  const std::vector<Chunk> all_chunks = chunks_of(corpora, config, all_labels);

  std::ostringstream table, ranked;
  table << "feature_set";
  for (const Pair& p : classification_pairs()) table << ',' << p.name;
  table << '\n';
  ranked << "feature_set,pair,rank,feature,weight,favors\n";
  json detail = json::object();

  for (std::size_t f = 0; f < specs.size(); ++f) {
    const std::string& row = config.feature_sets[f];
    table << csv_field(row);
    for (const Pair& pair : classification_pairs()) {
      std::vector<Chunk> chunks;
      std::vector<int> labels;
      for (std::size_t i = 0; i < all_chunks.size(); ++i) {
        const auto v = static_cast<Variety>(all_labels[i]);
        if (std::find(pair.varieties.begin(), pair.varieties.end(), v) !=
            pair.varieties.end()) {
          chunks.push_back(all_chunks[i]);
          labels.push_back(all_labels[i]);
        }
      }
      try {
        const CvReport cv = cross_validate(chunks, labels, specs[f], res,
                                           config.cv_folds, config.seed);
        for (const auto& warning : cv.warnings) {
          w.warn(row + " " + pair.name + ": " + warning);
        }
        table << ',' << percent(cv.mean_accuracy);
        detail[row][pair.name] = {{"mean_accuracy", cv.mean_accuracy},
                                  {"fold_accuracy", cv.fold_accuracy},
                                  {"fold_size", cv.fold_size},
                                  {"labels", varieties_json(cv.labels)},
                                  {"confusion", cv.confusion},
                                  {"seed", cv.seed}};
        if (pair.varieties.size() != 2) continue;
        const auto spaces = build_spaces(specs[f], chunks, res);
        std::vector<std::vector<double>> rows;
        for (const Chunk& c : chunks) rows.push_back(vectorize(c.view(), spaces));
        OneVsOneModel model = train_multiclass(rows, labels);
        SvmModel& binary = model.models.front();
        binary.feature_names.clear();
        for (const FeatureId& id : feature_ids(spaces)) {
          binary.feature_names.push_back(id.str());
        }
        const auto top = rank_features(binary);
        for (std::size_t r = 0; r < top.size() && r < 20; ++r) {
          const int favored =
              top[r].weight >= 0 ? binary.positive_label : binary.negative_label;
          ranked << csv_field(row) << ',' << pair.name << ',' << r + 1 << ','
                 << csv_field(top[r].name) << ','
                 << format_double(top[r].weight) << ','
                 << variety_name(static_cast<Variety>(favored)) << '\n';
        }
      } catch (const ValidationError& e) {
        // A row that cannot be computed (e.g. POS features on untagged
        // text) is reported; the other rows still run.
        w.warn(row + " " + pair.name + ": " + e.what());
        table << ",error";
        detail[row][pair.name] = {{"error", e.what()}};
      }
    }
    table << '\n';
  }
  w.add("table.csv", table.str());
  w.add("cv.json", detail.dump(2) + "\n");
  w.add("ranked_features.csv", ranked.str());
  w.commit();
}

void stage_cluster(const PipelineConfig& config, std::ostream& log) {
  StageWriter w(config, "cluster", log);
  const ResourceBundle res = load_resources(config.resources);
  const auto corpora = load_ingested(config, res.tagset);
  std::vector<int> labels;
  const std::vector<Chunk> chunks = chunks_of(corpora, config, labels);
  const auto spaces =
      build_spaces(parse_feature_set(config.cluster_features), chunks, res);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> ids;
  std::map<int, std::size_t> seen;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    rows.push_back(vectorize(chunks[i].view(), spaces));
    ids.push_back(std::string(variety_name(static_cast<Variety>(labels[i]))) +
                  "-" + std::to_string(seen[labels[i]]++));
  }
  const std::vector<std::string> names = {"N", "NN", "T"};
  const Projection2D proj = pca_2d(rows);
  json summary = {{"chunks", chunks.size()},
                  {"features", config.cluster_features},
                  {"dimension", total_dimension(spaces)},
                  {"explained_variance", proj.explained}};
  std::ostringstream centroids;
  centroids << "k,cluster,x,y\n";
  for (std::size_t k : {3u, 2u}) {
    const Clustering cl = bisecting_kmeans(rows, k, config.seed);
    const ClusterMatch match = match_clusters(cl.assignment, labels);
    std::ostringstream scatter;
    write_scatter_csv(scatter, proj, cl, labels, names, ids);
    w.add("k" + std::to_string(k) + "_scatter.csv", scatter.str());

    std::vector<std::map<std::string, std::size_t>> composition(k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ++composition[cl.assignment[i]][names[labels[i]]];
    }
    json clusters = json::array();
    for (std::size_t c = 0; c < k; ++c) {
      std::array<double, 2> xy{};
      for (int a = 0; a < 2; ++a) {
        for (std::size_t d = 0; d < proj.mean.size(); ++d) {
          xy[a] += (cl.centroids[c][d] - proj.mean[d]) * proj.axes[a][d];
        }
      }
      centroids << k << ',' << c << ',' << format_double(xy[0]) << ','
                << format_double(xy[1]) << '\n';
      const int label = match.label_of_cluster[c];
      clusters.push_back(
          {{"cluster", c},
           {"matched_label", label < 0 ? json(nullptr) : json(names[label])},
           {"sse", cl.cluster_sse[c]},
           {"composition", composition[c]}});
    }
    // Cluster holding the majority of each variety's chunks.
    json majority = json::object();
    for (int l = 0; l < 3; ++l) {
      std::size_t best = 0, best_count = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const auto it = composition[c].find(names[l]);
        const std::size_t n = it == composition[c].end() ? 0 : it->second;
        if (n > best_count) best = c, best_count = n;
      }
      majority[names[l]] = best;
    }
    json entry = {{"accuracy", match.accuracy},
                  {"sse", cl.sse},
                  {"clusters", clusters},
                  {"majority_cluster", majority}};
    if (k == 2) {
      entry["nn_with_t"] = majority["NN"] == majority["T"] &&
                           majority["N"] != majority["NN"];
    }
    summary["k" + std::to_string(k)] = entry;
  }
  w.add("centroids.csv", centroids.str());
  w.add("summary.json", summary.dump(2) + "\n");
  w.commit();
}

void stage_metrics(const PipelineConfig& config, std::ostream& log) {
  StageWriter w(config, "metrics", log);
  const ResourceBundle res = load_resources(config.resources);
  const auto corpora = load_ingested(config, res.tagset);
  std::size_t target = config.metrics_tokens.value_or(0);
  if (!config.metrics_tokens) {
    target = corpora.begin()->second.token_count();
    for (const auto& [v, c] : corpora) target = std::min(target, c.token_count());
  }
  std::map<Variety, Corpus> slices;
  for (const auto& [v, c] : corpora) {
    const std::uint64_t seed =
        derive_seed(config.seed, 100 + static_cast<std::uint64_t>(v));
    slices.emplace(v, take_tokens(shuffle(c, seed), target));
  }
  const CorpusView n(slices.at(Variety::kNative));
  const CorpusView nn(slices.at(Variety::kNonNative));
  const CorpusView t(slices.at(Variety::kTranslated));
  std::vector<MetricRow> rows = compute_metrics(n, nn, t, res);
  json metrics = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MetricFn fn = bind_metric(rows[i].metric, res);
    const std::string name(metric_name(rows[i].metric));
    BootstrapConfig boot;
    boot.iterations = config.bootstrap_iterations;
    boot.seed = derive_seed(config.seed, 200 + i);
    const BootstrapResult total = test_d_total(fn, n, nn, t, boot, name);
    const BootstrapResult dif = test_d_dif(fn, n, nn, t, boot, name);
    rows[i].significance = dif.significant ? "*" : "";
    json triple = json::object(), normalized = json::object();
    for (std::size_t j = 0; j < 3; ++j) {
      const std::string v(variety_name(kTripleOrder[j]));
      triple[v] = rows[i].triple.raw[j];
      normalized[v] = rows[i].triple.normalized[j];
    }
    metrics.push_back({{"metric", name},
                       {"raw", triple},
                       {"normalized", normalized},
                       {"d_total", d_total_json(total)},
                       {"d_dif", d_dif_json(dif)},
                       {"star", dif.significant}});
  }
  std::ostringstream table;
  write_metric_table(table, rows);
  const json doc = {{"tokens",
                     {{"N", n.token_count()},
                      {"NN", nn.token_count()},
                      {"T", t.token_count()}}},
                    {"target_tokens", target},
                    {"iterations", config.bootstrap_iterations},
                    {"metrics", metrics}};
  w.add("table.csv", table.str());
  w.add("significance.json", doc.dump(2) + "\n");
  w.commit();
}

Corpus take_sentences(const Corpus& corpus, std::size_t count) {
  const auto& s = corpus.sentences();
  return Corpus(std::vector<AnnotatedSentence>(
                    s.begin(), s.begin() + std::min(count, s.size())),
                corpus.provenance());
}

void stage_lm(const PipelineConfig& config, std::ostream& log) {
  StageWriter w(config, "lm", log);
  const ResourceBundle res = load_resources(config.resources);
  const auto corpora = load_ingested(config, res.tagset);
  struct FamilySets {
    std::string name;
    Corpus t, nn;
  };
  std::vector<FamilySets> families;
  for (LanguageFamily f : {LanguageFamily::kGermanic, LanguageFamily::kRomance}) {
    SentenceFilter filter_by;
    filter_by.family = f;
    const std::string prefix = f == LanguageFamily::kGermanic ? "Ger" : "Rom";
    families.push_back(
        {prefix, filter(corpora.at(Variety::kTranslated), filter_by),
         filter(corpora.at(Variety::kNonNative), filter_by)});
    if (families.back().t.empty() || families.back().nn.empty()) {
      throw ValidationError("lm: no " + std::string(family_name(f)) + " " +
                            (families.back().t.empty() ? "T" : "NN") +
                            " sentences (country or family annotations missing?)");
    }
  }

  std::ostringstream stats;
  stats << "set,sentences,tokens,types\n";
  for (const auto& f : families) {
    stats << f.name << "NN," << f.nn.size() << ',' << f.nn.token_count() << ','
          << type_count(f.nn) << '\n';
    stats << f.name << "T," << f.t.size() << ',' << f.t.token_count() << ','
          << type_count(f.t) << '\n';
  }
  w.add("families.csv", stats.str());

  // Both models see the same token budget.
  std::size_t budget = config.lm_train_tokens;
  for (const auto& f : families) budget = std::min(budget, f.t.token_count());
  if (budget < config.lm_train_tokens) {
    w.warn("only " + std::to_string(budget) +
           " training tokens per family available (configured " +
           std::to_string(config.lm_train_tokens) + "); scaled-down run");
  }
  std::vector<KneserNeyModel> models;
  for (std::size_t i = 0; i < families.size(); ++i) {
    const Corpus train =
        take_tokens(shuffle(families[i].t, derive_seed(config.seed, 300 + i)),
                    budget);
    models.push_back(
        train_lm(tag_sentences(CorpusView(train)), res.tagset, config.lm_order));
    for (const auto& warning : models.back().warnings()) {
      w.warn(families[i].name + "T: " + warning);
    }
    std::ostringstream arpa;
    write_arpa(models.back(), arpa);
    w.add(families[i].name + "T.arpa", arpa.str());
  }

  std::ostringstream table, chunk_csv;
  table << "lm,test,perplexity,scored,excluded\n";
  chunk_csv << "test,chunk,first_sentence,sentences,short,ppl_GerT,ppl_RomT\n";
  json ttests = json::object();
  for (std::size_t i = 0; i < families.size(); ++i) {
    const std::string test_name = families[i].name + "NN";
    Corpus test = take_sentences(
        shuffle(families[i].nn, derive_seed(config.seed, 400 + i)),
        config.lm_test_sentences);
    if (test.size() < config.lm_test_sentences) {
      w.warn(test_name + ": " + std::to_string(test.size()) +
             " test sentences available (configured " +
             std::to_string(config.lm_test_sentences) + ")");
    }
    const auto tags = tag_sentences(CorpusView(test));
    std::vector<PerplexityReport> reports;
    for (std::size_t m = 0; m < models.size(); ++m) {
      reports.push_back(ppl_by_chunks(models[m], tags, config.lm_chunk_sentences));
      table << families[m].name << "T," << test_name << ','
            << format_double(reports[m].perplexity) << ',' << reports[m].scored
            << ',' << reports[m].excluded << '\n';
    }
    std::vector<double> ger, rom;
    for (std::size_t c = 0; c < reports[0].chunks.size(); ++c) {
      const auto& a = reports[0].chunks[c];
      const auto& b = reports[1].chunks[c];
      chunk_csv << test_name << ',' << c << ',' << a.first_sentence << ','
                << a.sentences << ',' << (a.short_chunk ? 1 : 0) << ','
                << format_double(a.perplexity) << ','
                << format_double(b.perplexity) << '\n';
      // The t-test pairs full chunks only.
      if (!a.short_chunk) {
        ger.push_back(a.perplexity);
        rom.push_back(b.perplexity);
      }
    }
    try {
      json entry = ttest_json(paired_ttest(ger, rom));
      entry["chunks"] = ger.size();
      ttests[test_name] = entry;
    } catch (const ValidationError& e) {
      w.warn(test_name + " t-test skipped: " + e.what());
      ttests[test_name] = {{"error", e.what()}, {"chunks", ger.size()}};
    }
  }
  w.add("perplexity.csv", table.str());
  w.add("chunks.csv", chunk_csv.str());
  w.add("ttest.json", ttests.dump(2) + "\n");

  // Per-country scatter: x = GerT perplexity, y = RomT perplexity.
  std::map<std::string, std::vector<AnnotatedSentence>> by_country;
  for (const auto& s : corpora.at(Variety::kNonNative).sentences()) {
    if (s.country) by_country[*s.country].push_back(s);
  }
  std::ostringstream countries;
  countries << "country,family,sentences,ppl_GerT,ppl_RomT,below_diagonal\n";
  for (const auto& [country, sentences] : by_country) {
    const Corpus all(sentences);
    const Corpus sample = take_sentences(
        shuffle(all, derive_seed(config.seed, 500)), config.lm_country_sentences);
    const auto tags = tag_sentences(CorpusView(sample));
    const double x = ppl(models[0], tags).perplexity;
    const double y = ppl(models[1], tags).perplexity;
    countries << country << ','
              << family_name(family_of_country(country)) << ','
              << sample.size() << ',' << format_double(x) << ','
              << format_double(y) << ',' << (y < x ? 1 : 0) << '\n';
  }
  w.add("countries.csv", countries.str());
  w.commit();
}

std::string csv_to_markdown(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  bool header = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    out += "|";
    for (const auto& c : cells) out += " " + c + " |";
    out += "\n";
    if (header) {
      out += "|";
      for (std::size_t i = 0; i < cells.size(); ++i) out += " --- |";
      out += "\n";
      header = false;
    }
  }
  return out;
}

void stage_report(const PipelineConfig& config, std::ostream& log) {
  StageWriter w(config, "report", log);
  json files = json::array();
  json stages = json::object();
  std::map<std::string, std::string> contents;
  for (std::string_view stage : kStages) {
    if (stage == "report") continue;
    const json record = read_stage_record(config, stage);
    const fs::path dir = config.out / stage;
    for (const auto& f : record["files"]) {
      const std::string rel = f["path"];
      const fs::path path = dir / rel;
      if (!fs::exists(path)) {
        throw ValidationError("stage '" + std::string(stage) +
                              "' output is incomplete: " + path.string() +
                              " is missing; rerun `varieties " +
                              std::string(stage) + "`");
      }
      const std::string bytes = read_file(path);
      if (sha256_hex(bytes) != f["sha256"]) {
        throw ValidationError("stage '" + std::string(stage) + "' output " +
                              path.string() + " changed since it was written; "
                              "rerun `varieties " + std::string(stage) + "`");
      }
      contents[std::string(stage) + "/" + rel] = bytes;
    }
    const json timing = json::parse(read_file(dir / "timing.json"));
    stages[std::string(stage)] = {{"seconds", timing["seconds"]},
                                  {"warnings", record["warnings"]}};
  }

  std::ostringstream md;
  md << "# Run report\n\n";
  md << "Seed " << config.seed << ", chunk size " << config.chunk_tokens
     << " tokens, " << config.cv_folds << "-fold CV, "
     << config.bootstrap_iterations << " bootstrap iterations, LM order "
     << config.lm_order << ".\n\n";
  md << "## Corpora\n\n" << csv_to_markdown(contents["ingest/summary.csv"]);
  md << "\n## Classification accuracy (%)\n\n"
     << csv_to_markdown(contents["classify/table.csv"]);
  const json cluster = json::parse(contents["cluster/summary.json"]);
  md << "\n## Clustering\n\n"
     << "| k | accuracy | SSE |\n| --- | --- | --- |\n";
  for (const char* k : {"k3", "k2"}) {
    md << "| " << k + 1 << " | " << format_double(cluster[k]["accuracy"])
       << " | " << format_double(cluster[k]["sse"]) << " |\n";
  }
  md << "\nk=2 groups NN with T apart from N: "
     << (cluster["k2"]["nn_with_t"].get<bool>() ? "yes" : "no") << "\n";
  md << "\n## Metrics (`*`: D_dif significant)\n\n"
     << csv_to_markdown(contents["metrics/table.csv"]);
  const json significance = json::parse(contents["metrics/significance.json"]);
  md << "\n| metric | D_total | p |\n| --- | --- | --- |\n";
  for (const auto& m : significance["metrics"]) {
    md << "| " << m["metric"].get<std::string>() << " | "
       << format_double(m["d_total"]["observed"]) << " | "
       << m["d_total"]["p_value"].dump() << " |\n";
  }
  md << "\n## POS language models\n\n"
     << csv_to_markdown(contents["lm/families.csv"]) << '\n'
     << csv_to_markdown(contents["lm/perplexity.csv"]) << '\n';
  const json ttests = json::parse(contents["lm/ttest.json"]);
  md << "| test | t | df | p |\n| --- | --- | --- | --- |\n";
  for (const auto& [name, t] : ttests.items()) {
    if (t.contains("error")) {
      md << "| " << name << " | - | - | " << t["error"].get<std::string>()
         << " |\n";
    } else {
      md << "| " << name << " | " << format_double(t["t"]) << " | "
         << t["df"].dump() << " | " << t["p_value"].dump() << " |\n";
    }
  }
  md << '\n' << csv_to_markdown(contents["lm/countries.csv"]);
  w.add("report.md", md.str());
  w.commit();

  // The manifest covers every stage directory, the report included.
  for (std::string_view stage : kStages) {
    const fs::path dir = config.out / stage;
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file()) paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const fs::path& p : paths) {
      const std::string bytes = read_file(p);
      files.push_back({{"path", std::string(stage) + "/" + p.filename().string()},
                       {"sha256", sha256_hex(bytes)},
                       {"bytes", bytes.size()}});
    }
  }
  const json report_timing =
      json::parse(read_file(config.out / "report" / "timing.json"));
  stages["report"] = {{"seconds", report_timing["seconds"]},
                      {"warnings", json::array()}};
  json resources = json::object();
  for (const auto& [name, path] : load_resources(config.resources).files) {
    resources[name] = {{"path", path.string()}, {"sha256", sha256_file(path)}};
  }
  resources["manifest"] = {{"path", config.resources.string()},
                           {"sha256", sha256_file(config.resources)}};
  json inputs = json::object();
  for (const auto& [v, path] : config.corpora) {
    inputs[std::string(variety_name(v))] = {
        {"path", path.string()},
        {"sha256", fs::exists(path) ? json(sha256_file(path)) : json(nullptr)}};
  }
  const json manifest = {{"config", config.snapshot()},
                         {"resources", resources},
                         {"inputs", inputs},
                         {"stages", stages},
                         {"files", files}};
  write_file_atomic(config.out / "manifest.json", manifest.dump(2) + "\n");
  log << "[report] wrote " << (config.out / "manifest.json").string() << '\n';
}

}  // namespace

std::map<std::string, std::string> PipelineConfig::snapshot() const {
  std::map<std::string, std::string> out;
  out["resources"] = resources.string();
  for (const auto& [v, p] : corpora) {
    out["corpus." + std::string(variety_name(v))] = p.string();
  }
  out["out"] = this->out.string();
  out["seed"] = std::to_string(seed);
  out["chunk_tokens"] = std::to_string(chunk_tokens);
  out["cv_folds"] = std::to_string(cv_folds);
  out["bootstrap_iterations"] = std::to_string(bootstrap_iterations);
  out["metrics_tokens"] =
      metrics_tokens ? std::to_string(*metrics_tokens) : "auto";
  std::string sets;
  for (const auto& s : feature_sets) sets += (sets.empty() ? "" : ",") + s;
  out["feature_sets"] = sets;
  out["cluster_features"] = cluster_features;
  out["lm_order"] = std::to_string(lm_order);
  out["lm_train_tokens"] = std::to_string(lm_train_tokens);
  out["lm_test_sentences"] = std::to_string(lm_test_sentences);
  out["lm_country_sentences"] = std::to_string(lm_country_sentences);
  out["lm_chunk_sentences"] = std::to_string(lm_chunk_sentences);
  return out;
}

std::optional<std::string> process_env(const std::string& name) {
  const char* value = std::getenv(name.c_str());
  if (value == nullptr) return std::nullopt;
  return std::string(value);
}

PipelineConfig parse_config(std::istream& in, const std::string& source,
                            const fs::path& base_dir, const Environment& env) {
  PipelineConfig config;
  std::string line, section;
  std::size_t line_no = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, line_no, "unclosed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!seen.insert(key).second) {
      throw ParseError(source, line_no, "duplicate key '" + key + "'");
    }
    try {
      apply_key(config, key, value, base_dir);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  for (const std::string& key : known_keys()) {
    if (const auto value = env(env_name(key))) {
      apply_key(config, key, *value, fs::current_path());
    }
  }
  return config;
}

PipelineConfig load_config(const fs::path& path, const Environment& env) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path.string());
  return parse_config(in, path.string(), path.parent_path(), env);
}

void validate_config(const PipelineConfig& config, bool need_corpora) {
  if (config.resources.empty()) throw ValidationError("config: resources is not set");
  if (!fs::exists(config.resources)) {
    throw ValidationError("config: resources " + config.resources.string() +
                          " does not exist");
  }
  if (need_corpora) {
    for (Variety v : kAllVarieties) {
      const std::string key = "corpus." + std::string(variety_name(v));
      const auto it = config.corpora.find(v);
      if (it == config.corpora.end()) throw ValidationError("config: " + key + " is not set");
      if (!fs::exists(it->second)) {
        throw ValidationError("config: " + key + " " + it->second.string() +
                              " does not exist");
      }
    }
  }
  const std::pair<const char*, std::size_t> positive[] = {
      {"chunk_tokens", config.chunk_tokens},
      {"cv_folds", config.cv_folds},
      {"bootstrap_iterations", config.bootstrap_iterations},
      {"lm_order", static_cast<std::size_t>(std::max(config.lm_order, 0))},
      {"lm_train_tokens", config.lm_train_tokens},
      {"lm_test_sentences", config.lm_test_sentences},
      {"lm_country_sentences", config.lm_country_sentences},
      {"lm_chunk_sentences", config.lm_chunk_sentences},
      {"metrics_tokens", config.metrics_tokens.value_or(1)}};
  for (const auto& [key, value] : positive) {
    if (value == 0) throw ValidationError(std::string("config: ") + key + " must be positive");
  }
  if (config.cv_folds < 2) throw ValidationError("config: cv_folds must be at least 2");
  if (config.feature_sets.empty()) throw ValidationError("config: feature_sets is empty");
  for (const auto& name : config.feature_sets) parse_feature_set(name);
  parse_feature_set(config.cluster_features);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void write_file_atomic(const fs::path& path, std::string_view contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

OutputLock::OutputLock(const fs::path& dir) : path_(dir / ".lock") {
  std::FILE* f = std::fopen(path_.c_str(), "wx");
  if (f == nullptr) {
    throw std::runtime_error("output directory " + dir.string() +
                             " is locked by another run (remove " +
                             path_.string() + " if that run is gone)");
  }
  std::fclose(f);
}

OutputLock::~OutputLock() {
  std::error_code ignored;
  fs::remove(path_, ignored);
}

void run_stage(std::string_view stage, const PipelineConfig& config,
               std::ostream& log) {
  if (stage == "ingest") {
    stage_ingest(config, log);
  } else if (stage == "classify") {
    stage_classify(config, log);
  } else if (stage == "cluster") {
    stage_cluster(config, log);
  } else if (stage == "metrics") {
    stage_metrics(config, log);
  } else if (stage == "lm") {
    stage_lm(config, log);
  } else if (stage == "report") {
    stage_report(config, log);
  } else {
    throw ValidationError("unknown stage '" + std::string(stage) + "'");
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err, const Environment& env) {
  CLI::App app{"Native, non-native and translated text analysis pipeline",
               "varieties"};
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "key = value config file")
      ->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "override the output directory");
  app.require_subcommand(1);
  const std::map<std::string, std::string> help = {
      {"ingest", "validate and normalize the three corpora"},
      {"classify", "cross-validated SVM accuracy per feature set and pair"},
      {"cluster", "bisecting k-means (k=3, k=2) with PCA scatter data"},
      {"metrics", "variety metrics with bootstrap significance"},
      {"lm", "POS language models per language family"},
      {"report", "consolidated report and run manifest"}};
  for (std::string_view stage : kStages) {
    app.add_subcommand(std::string(stage), help.at(std::string(stage)))
        ->fallthrough();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    PipelineConfig config = load_config(config_path, env);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.out = out_dir;
    validate_config(config, stage == "ingest");
    fs::create_directories(config.out);
    const OutputLock lock(config.out);
    run_stage(stage, config, err);
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace varieties
