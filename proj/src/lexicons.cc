#include "varieties/lexicons.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "varieties/error.h"

namespace varieties {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool is_lower(std::string_view s) {
  return std::none_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isupper(c) != 0;
  });
}

std::string strip(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::ifstream open_resource(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open resource " + path.string());
  return in;
}

}  // namespace

WordList::WordList(std::string name, std::vector<std::string> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError(name_ + ": word list is empty");
  for (const std::string& e : entries_) {
    if (split_ws(e).size() != 1 || e != strip(e)) {
      throw ValidationError(name_ + ": entry '" + e +
                            "' is not a single token");
    }
    if (!is_lower(e)) {
      throw ValidationError(name_ + ": entry '" + e + "' is not lowercase");
    }
    if (!lookup_.insert(e).second) {
      throw ValidationError(name_ + ": duplicate entry '" + e + "'");
    }
  }
}

std::string Phrase::text() const {
  std::string out;
  for (const std::string& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

PhraseList::PhraseList(std::string name, std::vector<Phrase> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    Phrase& p = entries_[i];
    if (p.tokens.empty()) throw ValidationError(name_ + ": empty phrase");
    for (std::string& t : p.tokens) t = lower(t);
    if (!seen.insert(p.text()).second) {
      throw ValidationError(name_ + ": duplicate phrase '" + p.text() + "'");
    }
    by_first_[p.tokens.front()].push_back(i);
  }
  for (auto& [first, list] : by_first_) {
    std::stable_sort(list.begin(), list.end(),
                     [this](std::size_t a, std::size_t b) {
                       return entries_[a].tokens.size() >
                              entries_[b].tokens.size();
                     });
  }
}

PhraseList PhraseList::with_category(std::string_view category) const {
  std::vector<Phrase> kept;
  for (const Phrase& p : entries_) {
    if (p.category && *p.category == category) kept.push_back(p);
  }
  return PhraseList(name_ + ":" + std::string(category), std::move(kept));
}

const std::vector<std::size_t>* PhraseList::candidates(
    std::string_view first_token) const {
  auto it = by_first_.find(std::string(first_token));
  return it == by_first_.end() ? nullptr : &it->second;
}

RankList::RankList(std::string name,
                   std::vector<std::pair<std::string, long>> entries)
    : name_(std::move(name)), entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError(name_ + ": rank list is empty");
  for (const auto& [word, rank] : entries_) {
    if (rank <= 0) {
      throw ValidationError(name_ + ": non-positive rank for '" + word + "'");
    }
    if (!lookup_.emplace(word, rank).second) {
      throw ValidationError(name_ + ": duplicate entry '" + word + "'");
    }
  }
}

std::optional<long> RankList::rank(std::string_view word) const {
  auto it = lookup_.find(std::string(word));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

TagSet::TagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {
  for (const std::string& t : tags_) {
    if (t.empty()) throw ValidationError("tagset: empty tag");
    if (!lookup_.insert(t).second) {
      throw ValidationError("tagset: duplicate tag '" + t + "'");
    }
  }
}

TagSet TagSet::penn_treebank() {
  return TagSet({"CC",  "CD",   "DT",  "EX",  "FW",  "IN",  "JJ",  "JJR",
                 "JJS", "LS",   "MD",  "NN",  "NNS", "NNP", "NNPS", "PDT",
                 "POS", "PRP",  "PRP$", "RB", "RBR", "RBS", "RP",  "SYM",
                 "TO",  "UH",   "VB",  "VBD", "VBG", "VBN", "VBP", "VBZ",
                 "WDT", "WP",   "WP$", "WRB", "$",   "#",   "``",  "''",
                 "-LRB-", "-RRB-", ",", ".",  ":"});
}

WordList parse_word_list(std::istream& in, const std::string& name) {
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    std::string e = strip(line);
    if (!e.empty()) entries.push_back(std::move(e));
  }
  return WordList(name, std::move(entries));
}

PhraseList parse_phrase_list(std::istream& in, const std::string& name) {
  std::vector<Phrase> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    Phrase p;
    const auto tab = line.find('\t');
    p.tokens = split_ws(line.substr(0, tab));
    if (tab != std::string::npos) {
      std::string category = strip(line.substr(tab + 1));
      if (!category.empty()) p.category = std::move(category);
    }
    if (p.tokens.empty()) throw ParseError(name, line_no, "empty phrase");
    entries.push_back(std::move(p));
  }
  if (entries.empty()) throw ValidationError(name + ": phrase list is empty");
  return PhraseList(name, std::move(entries));
}

RankList parse_rank_list(std::istream& in, const std::string& name) {
  std::vector<std::pair<std::string, long>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(name, line_no, "expected word<TAB>rank");
    }
    const std::string word = strip(line.substr(0, tab));
    const std::string rank_text = strip(line.substr(tab + 1));
    long rank = 0;
    std::size_t used = 0;
    try {
      rank = std::stol(rank_text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (word.empty() || used == 0 || used != rank_text.size()) {
      throw ParseError(name, line_no, "malformed rank line");
    }
    entries.emplace_back(word, rank);
  }
  return RankList(name, std::move(entries));
}

WordList load_word_list(const std::filesystem::path& path) {
  auto in = open_resource(path);
  return parse_word_list(in, path.string());
}

PhraseList load_phrase_list(const std::filesystem::path& path) {
  auto in = open_resource(path);
  return parse_phrase_list(in, path.string());
}

RankList load_rank_list(const std::filesystem::path& path) {
  auto in = open_resource(path);
  return parse_rank_list(in, path.string());
}

TagSet load_tagset(const std::filesystem::path& path) {
  auto in = open_resource(path);
  std::vector<std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = strip(line);
    if (!t.empty()) tags.push_back(std::move(t));
  }
  if (tags.empty()) throw ValidationError(path.string() + ": empty tagset");
  return TagSet(std::move(tags));
}

void write_word_list(const WordList& list, std::ostream& out) {
  for (const std::string& e : list.entries()) out << e << '\n';
}

void write_phrase_list(const PhraseList& list, std::ostream& out) {
  for (const Phrase& p : list.entries()) {
    out << p.text();
    if (p.category) out << '\t' << *p.category;
    out << '\n';
  }
}

void write_rank_list(const RankList& list, std::ostream& out) {
  for (const auto& [word, rank] : list.entries()) {
    out << word << '\t' << rank << '\n';
  }
}

std::vector<PhraseMatch> match_phrases(std::span<const std::string> tokens,
                                       const PhraseList& phrases) {
  std::vector<PhraseMatch> matches;
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const std::string& t : tokens) lowered.push_back(lower(t));

  std::size_t i = 0;
  while (i < lowered.size()) {
    std::size_t advance = 1;
    if (const auto* cands = phrases.candidates(lowered[i])) {
      for (std::size_t idx : *cands) {
        const auto& ptoks = phrases.entries()[idx].tokens;
        if (i + ptoks.size() > lowered.size()) continue;
        if (std::equal(ptoks.begin(), ptoks.end(), lowered.begin() + i)) {
          matches.push_back({idx, i});
          advance = ptoks.size();
          break;
        }
      }
    }
    i += advance;
  }
  return matches;
}

ResourceBundle load_resources(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw ValidationError("cannot open manifest " + manifest.string());
  ResourceBundle bundle;
  const auto base = manifest.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = strip(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParseError(manifest.string(), line_no, "expected name = path");
    }
    const std::string key = strip(s.substr(0, eq));
    std::filesystem::path path = strip(s.substr(eq + 1));
    if (path.is_relative()) path = base / path;
    if (key == "function_words") {
      bundle.function_words = load_word_list(path);
    } else if (key == "cohesive_markers") {
      bundle.cohesive_markers = load_phrase_list(path);
    } else if (key == "idioms") {
      bundle.idioms = load_phrase_list(path);
    } else if (key == "word_ranks") {
      bundle.word_ranks = load_rank_list(path);
    } else if (key == "tagset") {
      bundle.tagset = load_tagset(path);
    } else {
      throw ParseError(manifest.string(), line_no,
                       "unknown resource name '" + key + "'");
    }
    bundle.files[key] = path;
  }
  return bundle;
}

}  // namespace varieties
