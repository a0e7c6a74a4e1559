#include "varieties/lm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "varieties/error.h"
#include "varieties/features.h"

namespace varieties {
namespace {

constexpr std::uint32_t kBos = 0;
constexpr std::uint32_t kEos = 1;
constexpr int kMaxOrder = 9;

struct ContextStats {
  std::uint64_t total = 0;  // sum of adjusted counts of its extensions
  std::array<std::uint64_t, 3> types{};  // extensions with count 1, 2, 3+
};

double gamma_of(const ContextStats& s, const Discounts& d) {
  return (d.d[0] * static_cast<double>(s.types[0]) +
          d.d[1] * static_cast<double>(s.types[1]) +
          d.d[2] * static_cast<double>(s.types[2])) /
         static_cast<double>(s.total);
}

Gram prefix(const Gram& g) { return Gram(g.begin(), g.end() - 1); }
Gram suffix(const Gram& g) { return Gram(g.begin() + 1, g.end()); }

std::string join(const KneserNeyModel& model, const Gram& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) out += ' ';
    out += model.symbols()[g[i]];
  }
  return out;
}

}  // namespace

std::vector<TagSentence> tag_sentences(const CorpusView& corpus) {
  std::vector<TagSentence> out;
  out.reserve(corpus.size());
  for (const AnnotatedSentence* s : corpus.sentences()) {
    TagSentence tags;
    tags.reserve(s->tokens.size());
    for (const Token& t : s->tokens) {
      if (!t.pos) {
        throw ValidationError("token '" + t.surface + "' has no POS tag");
      }
      tags.push_back(*t.pos);
    }
    out.push_back(std::move(tags));
  }
  return out;
}

std::vector<TagSentence> read_tag_sentences(std::istream& in) {
  std::vector<TagSentence> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    TagSentence tags;
    for (std::string t; ss >> t;) tags.push_back(t);
    if (!tags.empty()) out.push_back(std::move(tags));
  }
  return out;
}

std::size_t GramHash::operator()(const Gram& g) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint32_t v : g) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

Discounts estimate_discounts(const std::array<std::uint64_t, 4>& n) {
  Discounts out;
  if (n[0] > 0 && n[1] > 0) {
    const double n1 = static_cast<double>(n[0]);
    const double y = n1 / (n1 + 2.0 * static_cast<double>(n[1]));
    bool valid = true;
    for (int k = 1; k <= 3; ++k) {
      const double nk = static_cast<double>(n[k - 1]);
      const double next = static_cast<double>(n[k]);
      const double d = nk > 0 ? k - (k + 1) * y * next / nk : -1.0;
      if (!(d > 0 && d < k)) valid = false;
      out.d[k - 1] = d;
    }
    if (valid) return out;
  }
  out.d = {kFallbackDiscount, kFallbackDiscount, kFallbackDiscount};
  out.fallback = true;
  return out;
}

NgramCounts count_ngrams(
    std::span<const TagSentence> sentences,
    const std::unordered_map<std::string, std::uint32_t>& ids, int order) {
  NgramCounts counts;
  counts.order = order;
  counts.raw.resize(order);
  counts.adjusted.resize(order);
  counts.count_of_counts.assign(order, {0, 0, 0, 0});
  Gram padded;
  for (const TagSentence& sentence : sentences) {
    padded.assign(order - 1, kBos);
    for (const std::string& tag : sentence) padded.push_back(ids.at(tag));
    padded.push_back(kEos);
    for (int m = 1; m <= order; ++m) {
      for (std::size_t start = 0; start + m <= padded.size(); ++start) {
        ++counts.raw[m - 1][Gram(padded.begin() + start,
                                 padded.begin() + start + m)];
      }
    }
  }
  counts.adjusted[order - 1] = counts.raw[order - 1];
  for (int m = order - 1; m >= 1; --m) {
    auto& adjusted = counts.adjusted[m - 1];
    for (const auto& [gram, c] : counts.raw[m]) {
      if (gram[1] != kBos) ++adjusted[suffix(gram)];
    }
    for (const auto& [gram, c] : counts.raw[m - 1]) {
      if (gram[0] == kBos) adjusted[gram] = c;
    }
  }
  for (int m = 1; m <= order; ++m) {
    for (const auto& [gram, a] : counts.adjusted[m - 1]) {
      if (gram.back() == kBos) continue;
      if (a >= 1 && a <= 4) ++counts.count_of_counts[m - 1][a - 1];
    }
  }
  return counts;
}

std::uint32_t KneserNeyModel::intern(std::string_view symbol) {
  const auto [it, inserted] = ids_.emplace(
      std::string(symbol), static_cast<std::uint32_t>(symbols_.size()));
  if (inserted) symbols_.emplace_back(symbol);
  return it->second;
}

std::optional<std::uint32_t> KneserNeyModel::id(
    std::string_view symbol) const {
  const auto it = ids_.find(std::string(symbol));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint32_t> KneserNeyModel::vocabulary() const {
  std::vector<std::uint32_t> out;
  const auto bos = id(kBeginTag);
  for (const auto& [gram, entry] : tables_[0]) {
    if (!bos || gram[0] != *bos) out.push_back(gram[0]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<double> KneserNeyModel::log10_prob(
    std::span<const std::uint32_t> context, std::uint32_t word) const {
  if (!tables_[0].contains(Gram{word})) return std::nullopt;
  std::size_t k = std::min<std::size_t>(context.size(), order_ - 1);
  double backoff = 0.0;
  for (;; --k) {
    Gram g(context.end() - k, context.end());
    g.push_back(word);
    const auto it = tables_[k].find(g);
    if (it != tables_[k].end()) return backoff + it->second.log10_prob;
    g.pop_back();
    const auto ctx = tables_[k - 1].find(g);
    if (ctx != tables_[k - 1].end() && ctx->second.has_backoff) {
      backoff += ctx->second.log10_backoff;
    }
  }
}

std::optional<double> KneserNeyModel::log10_prob(
    std::span<const std::string> context, std::string_view word) const {
  const auto w = id(word);
  if (!w) return std::nullopt;
  std::vector<std::uint32_t> ctx;
  for (const std::string& s : context) {
    if (const auto c = id(s)) {
      ctx.push_back(*c);
    } else {
      ctx.clear();
    }
  }
  return log10_prob(ctx, *w);
}

KneserNeyModel train_lm(std::span<const TagSentence> sentences,
                        const TagSet& tagset, int order) {
  if (order < 1 || order > kMaxOrder) {
    throw ValidationError("LM order must be in 1.." +
                          std::to_string(kMaxOrder) + ", got " +
                          std::to_string(order));
  }
  if (sentences.empty()) throw ValidationError("empty training corpus");
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    for (std::size_t i = 0; i < sentences[s].size(); ++i) {
      if (!tagset.contains(sentences[s][i])) {
        throw ValidationError("tag '" + sentences[s][i] +
                              "' at sentence " + std::to_string(s + 1) +
                              ", position " + std::to_string(i + 1) +
                              " is not in the tagset");
      }
    }
  }

  KneserNeyModel model;
  model.order_ = order;
  model.intern(kBeginTag);
  model.intern(kEndTag);
  for (const std::string& tag : tagset.tags()) model.intern(tag);
  const NgramCounts counts = count_ngrams(sentences, model.ids_, order);

  model.discounts_.resize(order);
  std::vector<std::unordered_map<Gram, ContextStats, GramHash>> stats(order);
  for (int m = 1; m <= order; ++m) {
    const auto& n = counts.count_of_counts[m - 1];
    model.discounts_[m - 1] = estimate_discounts(n);
    if (model.discounts_[m - 1].fallback) {
      model.warnings_.push_back(
          "order " + std::to_string(m) + ": count-of-counts (" +
          std::to_string(n[0]) + ", " + std::to_string(n[1]) + ", " +
          std::to_string(n[2]) + ", " + std::to_string(n[3]) +
          ") give no valid discounts; using " +
          format_double(kFallbackDiscount));
    }
    for (const auto& [gram, a] : counts.adjusted[m - 1]) {
      if (gram.back() == kBos) continue;
      ContextStats& s = stats[m - 1][prefix(gram)];
      s.total += a;
      ++s.types[std::min<std::uint64_t>(a, 3) - 1];
    }
  }

  // Interpolated probabilities, lowest order first.
  model.tables_.resize(order);
  const std::uint32_t vocab_size =
      static_cast<std::uint32_t>(model.symbols_.size()) - 1;  // minus <s>
  {
    const ContextStats& root = stats[0].at(Gram{});
    const Discounts& d = model.discounts_[0];
    const double gamma = gamma_of(root, d);
    auto& table = model.tables_[0];
    for (std::uint32_t w = kEos; w < model.symbols_.size(); ++w) {
      const auto it = counts.adjusted[0].find(Gram{w});
      const std::uint64_t a = it == counts.adjusted[0].end() ? 0 : it->second;
      const double p = std::max(static_cast<double>(a) - d.for_count(a), 0.0) /
                           static_cast<double>(root.total) +
                       gamma / vocab_size;
      table[Gram{w}].log10_prob = std::log10(p);
    }
    table[Gram{kBos}].log10_prob = kNeverPredicted;
  }
  for (int m = 2; m <= order; ++m) {
    const Discounts& d = model.discounts_[m - 1];
    auto& table = model.tables_[m - 1];
    const auto& lower = model.tables_[m - 2];
    for (const auto& [gram, a] : counts.adjusted[m - 1]) {
      if (gram.back() == kBos) {
        table[gram].log10_prob = kNeverPredicted;
        continue;
      }
      const ContextStats& s = stats[m - 1].at(prefix(gram));
      const double lower_p =
          std::pow(10.0, lower.at(suffix(gram)).log10_prob);
      const double p = std::max(static_cast<double>(a) - d.for_count(a), 0.0) /
                           static_cast<double>(s.total) +
                       gamma_of(s, d) * lower_p;
      table[gram].log10_prob = std::log10(p);
    }
  }
  for (int m = 1; m < order; ++m) {
    for (auto& [gram, entry] : model.tables_[m - 1]) {
      const auto it = stats[m].find(gram);
      if (it == stats[m].end()) continue;
      entry.log10_backoff = std::log10(gamma_of(it->second, model.discounts_[m]));
      entry.has_backoff = true;
    }
  }
  return model;
}

std::vector<PositionScore> score_sentence(const KneserNeyModel& model,
                                          const TagSentence& sentence,
                                          const PplOptions& options) {
  std::vector<PositionScore> out;
  out.reserve(sentence.size() + 1);
  const auto bos = model.id(kBeginTag);
  std::vector<std::uint32_t> history;
  if (bos) history.assign(model.order() - 1, *bos);
  auto score = [&](const std::string& symbol) {
    const auto w = model.id(symbol);
    std::optional<double> lp;
    if (w && w != bos) lp = model.log10_prob(history, *w);
    if (lp) {
      history.push_back(*w);
    } else {
      history.clear();
    }
    out.push_back({symbol, lp});
  };
  for (const std::string& tag : sentence) score(tag);
  if (options.score_end) score(std::string(kEndTag));
  return out;
}

namespace {

void accumulate(const KneserNeyModel& model, const TagSentence& sentence,
                const PplOptions& options, double& sum, std::size_t& scored,
                std::size_t& excluded) {
  for (const PositionScore& p : score_sentence(model, sentence, options)) {
    if (p.log10_prob) {
      sum += *p.log10_prob;
      ++scored;
    } else {
      ++excluded;
    }
  }
}

double perplexity_of(double sum, std::size_t scored) {
  return std::pow(10.0, -sum / static_cast<double>(scored));
}

}  // namespace

PerplexityReport ppl(const KneserNeyModel& model,
                     std::span<const TagSentence> sentences,
                     const PplOptions& options) {
  if (sentences.empty()) throw ValidationError("empty test set");
  PerplexityReport r;
  r.end_scored = options.score_end;
  for (const TagSentence& s : sentences) {
    accumulate(model, s, options, r.log10_sum, r.scored, r.excluded);
  }
  r.positions = r.scored + r.excluded;
  if (r.scored == 0) {
    throw ValidationError("no scorable positions in the test set");
  }
  r.perplexity = perplexity_of(r.log10_sum, r.scored);
  return r;
}

PerplexityReport ppl_by_chunks(const KneserNeyModel& model,
                               std::span<const TagSentence> sentences,
                               std::size_t chunk_sentences,
                               const PplOptions& options) {
  if (chunk_sentences == 0) throw ValidationError("chunk size must be > 0");
  PerplexityReport r = ppl(model, sentences, options);
  for (std::size_t start = 0; start < sentences.size();
       start += chunk_sentences) {
    ChunkPerplexity c;
    c.first_sentence = start;
    c.sentences = std::min(chunk_sentences, sentences.size() - start);
    c.short_chunk = c.sentences < chunk_sentences;
    for (std::size_t i = start; i < start + c.sentences; ++i) {
      accumulate(model, sentences[i], options, c.log10_sum, c.scored,
                 c.excluded);
    }
    if (c.scored == 0) {
      throw ValidationError("chunk starting at sentence " +
                            std::to_string(start + 1) +
                            " has no scorable positions");
    }
    c.perplexity = perplexity_of(c.log10_sum, c.scored);
    r.chunks.push_back(c);
  }
  return r;
}

void write_arpa(const KneserNeyModel& model, std::ostream& out) {
  const auto& tables = model.tables();
  out << "\\data\\\n";
  for (std::size_t m = 0; m < tables.size(); ++m) {
    out << "ngram " << m + 1 << '=' << tables[m].size() << '\n';
  }
  for (std::size_t m = 0; m < tables.size(); ++m) {
    out << "\n\\" << m + 1 << "-grams:\n";
    std::vector<std::pair<std::string, const KneserNeyModel::Entry*>> rows;
    rows.reserve(tables[m].size());
    for (const auto& [gram, entry] : tables[m]) {
      rows.emplace_back(join(model, gram), &entry);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [text, entry] : rows) {
      out << format_double(entry->log10_prob) << '\t' << text;
      if (entry->has_backoff) {
        out << '\t' << format_double(entry->log10_backoff);
      }
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

void write_arpa(const KneserNeyModel& model,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_arpa(model, out);
}

KneserNeyModel read_arpa(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  auto fail = [&](const std::string& what) {
    throw ParseError(source, line_no, what);
  };

  // Header.
  bool found = false;
  while (next_line()) {
    if (line == "\\data\\") {
      found = true;
      break;
    }
  }
  if (!found) fail("missing \\data\\ header");
  std::vector<std::size_t> declared;
  while (next_line() && !line.empty()) {
    if (line.rfind("ngram ", 0) != 0) fail("expected 'ngram N=count'");
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'ngram N=count'");
    std::size_t order = 0, count = 0;
    try {
      order = std::stoul(line.substr(6, eq - 6));
      count = std::stoul(line.substr(eq + 1));
    } catch (const std::exception&) {
      fail("malformed ngram count line '" + line + "'");
    }
    if (order != declared.size() + 1) fail("ngram orders out of sequence");
    declared.push_back(count);
  }
  if (declared.empty()) fail("no ngram counts in \\data\\ section");
  if (declared.size() > static_cast<std::size_t>(kMaxOrder)) {
    fail("order " + std::to_string(declared.size()) + " is not supported");
  }

  KneserNeyModel model;
  model.order_ = static_cast<int>(declared.size());
  model.tables_.resize(declared.size());
  for (std::size_t m = 1; m <= declared.size(); ++m) {
    const std::string header = "\\" + std::to_string(m) + "-grams:";
    while (next_line() && line.empty()) {
    }
    if (line != header) fail("expected section " + header);
    std::size_t seen = 0;
    while (next_line() && !line.empty()) {
      if (line[0] == '\\') break;
      std::istringstream ss(line);
      std::vector<std::string> fields;
      for (std::string f; ss >> f;) fields.push_back(f);
      if (fields.size() != m + 1 && fields.size() != m + 2) {
        fail("section " + header + ": expected " + std::to_string(m) +
             " symbols with a probability and optional backoff");
      }
      KneserNeyModel::Entry entry;
      try {
        entry.log10_prob = std::stod(fields[0]);
        if (fields.size() == m + 2) {
          entry.log10_backoff = std::stod(fields[m + 1]);
          entry.has_backoff = true;
        }
      } catch (const std::exception&) {
        fail("section " + header + ": malformed number");
      }
      Gram gram;
      for (std::size_t i = 1; i <= m; ++i) {
        if (m == 1) {
          gram.push_back(model.intern(fields[i]));
        } else {
          const auto id = model.id(fields[i]);
          if (!id) fail("section " + header + ": unknown symbol '" +
                        fields[i] + "'");
          gram.push_back(*id);
        }
      }
      if (!model.tables_[m - 1].emplace(std::move(gram), entry).second) {
        fail("section " + header + ": duplicate entry");
      }
      ++seen;
    }
    if (seen != declared[m - 1]) {
      fail("section " + header + " declares " +
           std::to_string(declared[m - 1]) + " entries but has " +
           std::to_string(seen));
    }
    if (!line.empty() && line[0] == '\\' && line != "\\end\\" &&
        m == declared.size()) {
      fail("unexpected section " + line);
    }
    if (line == "\\end\\" && m != declared.size()) {
      fail("\\end\\ before section \\" + std::to_string(m + 1) + "-grams:");
    }
    if (!line.empty() && line[0] == '\\' && line != "\\end\\") {
      fail("missing blank line before " + line);
    }
  }
  if (line != "\\end\\") {
    while (next_line() && line.empty()) {
    }
    if (line != "\\end\\") fail("missing \\end\\ marker");
  }
  return model;
}

KneserNeyModel read_arpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return read_arpa(in, path.string());
}

}  // namespace varieties
