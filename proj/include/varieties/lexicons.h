#ifndef VARIETIES_LEXICONS_H_
#define VARIETIES_LEXICONS_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace varieties {

// A set of lowercased single-token words, kept in file order.
class WordList {
 public:
  WordList() = default;
  // Throws ValidationError on empty input, duplicates, uppercase or
  // whitespace inside an entry.
  WordList(std::string name, std::vector<std::string> entries);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view word) const {
    return lookup_.contains(std::string(word));
  }

 private:
  std::string name_;
  std::vector<std::string> entries_;
  std::unordered_set<std::string> lookup_;
};

struct Phrase {
  std::vector<std::string> tokens;
  std::optional<std::string> category;

  std::string text() const;  // tokens joined by a single space
  bool operator==(const Phrase&) const = default;
};

class PhraseList {
 public:
  PhraseList() = default;
  // Throws ValidationError on an empty phrase or a duplicate phrase.
  PhraseList(std::string name, std::vector<Phrase> entries);

  const std::string& name() const { return name_; }
  const std::vector<Phrase>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Entries whose category equals `category`, as a new list.
  PhraseList with_category(std::string_view category) const;

  // Candidate phrase indices starting with `first_token`, longest first.
  const std::vector<std::size_t>* candidates(std::string_view first_token) const;

 private:
  std::string name_;
  std::vector<Phrase> entries_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_first_;
};

class RankList {
 public:
  RankList() = default;
  // Ranks must be positive; a word may appear once.
  RankList(std::string name,
           std::vector<std::pair<std::string, long>> entries);

  const std::string& name() const { return name_; }
  std::size_t size() const { return entries_.size(); }
  std::optional<long> rank(std::string_view word) const;
  const std::vector<std::pair<std::string, long>>& entries() const {
    return entries_;
  }

 private:
  std::string name_;
  std::vector<std::pair<std::string, long>> entries_;
  std::unordered_map<std::string, long> lookup_;
};

// Closed POS vocabulary.
class TagSet {
 public:
  TagSet() = default;
  explicit TagSet(std::vector<std::string> tags);

  // The 45-symbol Penn Treebank tagset (36 word tags + 9 punctuation tags).
  static TagSet penn_treebank();

  bool contains(std::string_view tag) const {
    return lookup_.contains(std::string(tag));
  }
  const std::vector<std::string>& tags() const { return tags_; }
  std::size_t size() const { return tags_.size(); }

 private:
  std::vector<std::string> tags_;
  std::unordered_set<std::string> lookup_;
};

WordList load_word_list(const std::filesystem::path& path);
// `phrase[<TAB>category]` per line.
PhraseList load_phrase_list(const std::filesystem::path& path);
// `word<TAB>rank` per line.
RankList load_rank_list(const std::filesystem::path& path);
// One tag per line.
TagSet load_tagset(const std::filesystem::path& path);

WordList parse_word_list(std::istream& in, const std::string& name);
PhraseList parse_phrase_list(std::istream& in, const std::string& name);
RankList parse_rank_list(std::istream& in, const std::string& name);

void write_word_list(const WordList& list, std::ostream& out);
void write_phrase_list(const PhraseList& list, std::ostream& out);
void write_rank_list(const RankList& list, std::ostream& out);

struct PhraseMatch {
  std::size_t phrase;  // index into PhraseList::entries()
  std::size_t start;   // token index
};

// Case-insensitive exact token-sequence matching. At each position the
// longest phrase wins and scanning resumes after it, so spans never overlap.
std::vector<PhraseMatch> match_phrases(std::span<const std::string> tokens,
                                       const PhraseList& phrases);

// Every resource an analysis run depends on, loaded through a manifest of
// `name = relative/path` lines. Recognized names: function_words,
// cohesive_markers, idioms, word_ranks, tagset. Missing optional entries
// stay empty; the tagset falls back to Penn Treebank.
struct ResourceBundle {
  WordList function_words;
  PhraseList cohesive_markers;
  PhraseList idioms;
  RankList word_ranks;
  TagSet tagset = TagSet::penn_treebank();
  std::map<std::string, std::filesystem::path> files;
};

ResourceBundle load_resources(const std::filesystem::path& manifest);

// Category tag for the sentence-transition subset of cohesive markers.
inline constexpr std::string_view kSentenceTransition = "sentence_transition";

}  // namespace varieties

#endif  // VARIETIES_LEXICONS_H_
