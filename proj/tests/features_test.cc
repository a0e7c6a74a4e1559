#include "varieties/features.h"

#include <sstream>

#include "gtest/gtest.h"
#include "support/synthetic.h"
#include "varieties/error.h"

namespace varieties {
namespace {

using testing::make_sentence;

Chunk chunk_of(std::vector<AnnotatedSentence> sentences) {
  Chunk c;
  for (const auto& s : sentences) c.token_count += s.tokens.size();
  c.sentences = std::move(sentences);
  return c;
}

WordList fw_list(std::vector<std::string> words) {
  return WordList("fw", std::move(words));
}

TEST(ExtractFwTest, CountsOverTokens) {
  const Chunk c = chunk_of({make_sentence({"the", "cat", "the", "dog"})});
  const FeatureVector v = extract_fw(c.view(), fw_list({"the"}));
  ASSERT_EQ(v.values.size(), 1u);
  EXPECT_DOUBLE_EQ(v.get({FeatureFamily::kFunctionWords, "the"}), 0.5);
  EXPECT_EQ(v.token_count, 4u);
}

TEST(ExtractFwTest, NoFunctionWords) {
  const Chunk c = chunk_of({make_sentence({"cat", "dog", "fish"})});
  const FeatureVector v = extract_fw(c.view(), fw_list({"the"}));
  EXPECT_TRUE(v.values.empty());
  EXPECT_EQ(v.token_count, 3u);
}

TEST(ExtractFwTest, TwoThousandTokenChunk) {
  // 20 sentences of 100 tokens; "of" is every 20th token -> 100 occurrences.
  std::vector<AnnotatedSentence> sentences;
  std::size_t of_count = 0;
  for (int s = 0; s < 20; ++s) {
    std::vector<std::string> toks;
    for (int i = 0; i < 100; ++i) {
      if (i % 20 == 0) {
        toks.push_back("of");
        ++of_count;
      } else {
        toks.push_back("x" + std::to_string(i));
      }
    }
    sentences.push_back(make_sentence(toks));
  }
  ASSERT_EQ(of_count, 100u);
  const Chunk c = chunk_of(std::move(sentences));
  ASSERT_EQ(c.token_count, 2000u);
  const FeatureVector v = extract_fw(c.view(), fw_list({"of", "the"}));
  EXPECT_DOUBLE_EQ(v.get({FeatureFamily::kFunctionWords, "of"}), 0.05);
}

TEST(ExtractPos3Test, SingleTrigram) {
  const Chunk c = chunk_of(
      {make_sentence({"he", "has", "been"}, Variety::kTranslated,
                     {"PRP", "VHZ", "VBN"})});
  const FeatureVector v = extract_pos3(c.view());
  ASSERT_EQ(v.values.size(), 1u);
  // Count 1 over 3 tokens.
  EXPECT_DOUBLE_EQ(v.get({FeatureFamily::kPosTrigrams, "PRP_VHZ_VBN"}),
                   1.0 / 3.0);
}

TEST(ExtractPos3Test, ShortSentenceAndNoCrossing) {
  const Chunk c = chunk_of({make_sentence({"a", "b"}, Variety::kNative,
                                          {"DT", "NN"}),
                            make_sentence({"c", "d"}, Variety::kNative,
                                          {"VB", "RB"})});
  EXPECT_TRUE(extract_pos3(c.view()).values.empty());
}

TEST(ExtractPos3Test, MissingTagRejected) {
  const Chunk c = chunk_of({make_sentence({"a", "b", "c"}, Variety::kNative,
                                          {"DT", "NN"})});
  EXPECT_THROW(extract_pos3(c.view()), ValidationError);
}

TEST(SelectTopPos3Test, ByCountThenKey) {
  // A = DT_NN_VB five times, B = CC_DT_NN three times.
  std::vector<AnnotatedSentence> s;
  for (int i = 0; i < 5; ++i) {
    s.push_back(make_sentence({"a", "b", "c"}, Variety::kNative,
                              {"DT", "NN", "VB"}));
  }
  for (int i = 0; i < 3; ++i) {
    s.push_back(make_sentence({"a", "b", "c"}, Variety::kNative,
                              {"CC", "DT", "NN"}));
  }
  const std::vector<Chunk> chunks = {chunk_of(std::move(s))};
  const FeatureSpace one = select_top_pos3(chunks, 1);
  EXPECT_EQ(one.keys(), (std::vector<std::string>{"DT_NN_VB"}));

  const std::vector<Chunk> tie = {chunk_of(
      {make_sentence({"a", "b", "c"}, Variety::kNative, {"VB", "VB", "VB"}),
       make_sentence({"a", "b", "c"}, Variety::kNative, {"CC", "CC", "CC"})})};
  EXPECT_EQ(select_top_pos3(tie, 2).keys(),
            (std::vector<std::string>{"CC_CC_CC", "VB_VB_VB"}));
}

TEST(PositionalTest, HandTrace) {
  const auto s = make_sentence({"we", "must", "act"});
  const std::vector<std::string> expected = {
      "first:we", "second:must", "third:act", "penultimate:must", "last:act"};
  EXPECT_EQ(positional_events(s.tokens), expected);
}

TEST(PositionalTest, SingleToken) {
  const auto s = make_sentence({"yes"});
  EXPECT_EQ(positional_events(s.tokens),
            (std::vector<std::string>{"first:yes", "last:yes"}));
}

TEST(PositionalTest, VocabularyProjection) {
  const Chunk c = chunk_of({make_sentence({"we", "must", "act", "now"})});
  const FeatureSpace empty(FeatureFamily::kPositionalTokens, {}, "empty");
  EXPECT_TRUE(extract_postok(c.view(), empty).values.empty());

  const FeatureSpace vocab(FeatureFamily::kPositionalTokens,
                           {"first:we", "last:now", "first:they"}, "v");
  const FeatureVector v = extract_postok(c.view(), vocab);
  EXPECT_EQ(v.values.size(), 2u);
  EXPECT_DOUBLE_EQ(v.get({FeatureFamily::kPositionalTokens, "first:we"}),
                   0.25);
}

TEST(PositionalTest, VocabularyMinimumCount) {
  std::vector<AnnotatedSentence> s;
  for (int i = 0; i < 5; ++i) s.push_back(make_sentence({"we", "go"}));
  s.push_back(make_sentence({"they", "go"}));
  const std::vector<Chunk> chunks = {chunk_of(std::move(s))};
  const FeatureSpace vocab = select_postok_vocab(chunks, 5);
  // first:we x5, second:go x6, penultimate:we x5, last:go x6.
  EXPECT_EQ(vocab.keys(),
            (std::vector<std::string>{"first:we", "last:go", "penultimate:we",
                                      "second:go"}));
}

PhraseList markers(std::initializer_list<const char*> texts) {
  std::vector<Phrase> entries;
  for (const char* t : texts) {
    Phrase p;
    std::istringstream in(t);
    std::string w;
    while (in >> w) p.tokens.push_back(w);
    entries.push_back(std::move(p));
  }
  return PhraseList("coh", std::move(entries));
}

Chunk filler_chunk(std::size_t tokens,
                   const std::vector<std::vector<std::string>>& inserts) {
  std::vector<AnnotatedSentence> s;
  std::size_t used = 0;
  for (const auto& ins : inserts) {
    s.push_back(make_sentence(ins));
    used += ins.size();
  }
  std::vector<std::string> rest(tokens - used, "filler");
  s.push_back(make_sentence(rest));
  return chunk_of(std::move(s));
}

TEST(ExtractCohTest, NormalizedMarkerCounts) {
  const Chunk c = filler_chunk(1000, {{"in", "addition", "we"},
                                      {"in", "addition"}});
  const FeatureVector v = extract_coh(c.view(), markers({"in addition",
                                                         "thus"}));
  EXPECT_DOUBLE_EQ(v.get({FeatureFamily::kCohesiveMarkers, "in addition"}),
                   0.002);

  const Chunk t = filler_chunk(1500, {{"thus"}, {"thus"}, {"and", "thus"}});
  EXPECT_DOUBLE_EQ(extract_coh(t.view(), markers({"thus"}))
                       .get({FeatureFamily::kCohesiveMarkers, "thus"}),
                   0.002);

  const Chunk none = filler_chunk(10, {});
  EXPECT_TRUE(extract_coh(none.view(), markers({"thus"})).values.empty());
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

TEST(VectorizeTest, DimensionIsSumOfSpaces) {
  const std::vector<FeatureSpace> spaces = {
      FeatureSpace(FeatureFamily::kFunctionWords, numbered("fw", 400), "fw"),
      FeatureSpace(FeatureFamily::kPosTrigrams, numbered("T_T_", 3000),
                   "pos")};
  const Chunk c = chunk_of(
      {make_sentence({"fw3", "b", "fw3"}, Variety::kNative,
                     {"T", "T", "0"})});
  const auto v = vectorize(c.view(), spaces);
  ASSERT_EQ(v.size(), 3400u);
  EXPECT_DOUBLE_EQ(v[3], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(v[400], 1.0 / 3.0);  // T_T_0 is key 0 of the POS space
  EXPECT_EQ(v, vectorize(c.view(), spaces));
}

TEST(VectorizeTest, NoFeaturesGivesZeroVector) {
  const std::vector<FeatureSpace> spaces = {
      function_word_space(fw_list({"the", "of"})),
      cohesive_marker_space(markers({"in addition"}))};
  const Chunk c = chunk_of({make_sentence({"cat", "dog"})});
  EXPECT_EQ(vectorize(c.view(), spaces), std::vector<double>(3, 0.0));
}

TEST(VectorizeTest, DuplicationLeavesValuesUnchanged) {
  testing::SyntheticSpec spec;
  spec.sentences = 40;
  const Corpus corpus = generate_variety(Variety::kNative, spec, 5);
  Chunk once;
  for (const auto& s : corpus.sentences()) {
    once.sentences.push_back(s);
    once.token_count += s.tokens.size();
  }
  Chunk thrice = once;
  for (int k = 0; k < 2; ++k) {
    for (const auto& s : corpus.sentences()) {
      thrice.sentences.push_back(s);
      thrice.token_count += s.tokens.size();
    }
  }
  const std::vector<Chunk> training = {once};
  const std::vector<FeatureSpace> spaces = {
      function_word_space(testing::synthetic_function_word_list()),
      select_top_pos3(training, 50), select_postok_vocab(training, 2)};
  const auto a = vectorize(once.view(), spaces);
  const auto b = vectorize(thrice.view(), spaces);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(VectorizeTest, FunctionWordMassBounded) {
  testing::SyntheticSpec spec;
  spec.sentences = 30;
  const Corpus corpus = generate_variety(Variety::kNonNative, spec, 9);
  const FeatureVector v =
      extract_fw(CorpusView(corpus), testing::synthetic_function_word_list());
  double sum = 0;
  for (const auto& [id, value] : v.values) sum += value;
  EXPECT_LE(sum, 1.0 + 1e-12);
  EXPECT_GT(sum, 0.0);
}

TEST(FeatureSetTest, ParseAndName) {
  const FeatureSetSpec s = parse_feature_set("FW+POS+POSTOK");
  EXPECT_TRUE(s.fw && s.pos3 && s.postok && !s.coh);
  EXPECT_EQ(s.name(), "FW+POS+POSTOK");
  EXPECT_THROW(parse_feature_set("FW+BOGUS"), ValidationError);
}

TEST(ExportTest, SparseAndDenseCsv) {
  const FeatureSpace space(FeatureFamily::kPosTrigrams, {",_DT_NN", "A_B_C"},
                           "s");
  std::vector<FeatureVector> rows(1);
  rows[0].values[{FeatureFamily::kPosTrigrams, ",_DT_NN"}] = 0.25;
  rows[0].token_count = 4;
  std::ostringstream sparse;
  write_sparse_csv(rows, sparse);
  EXPECT_EQ(sparse.str(), "chunk_id,feature,value\n0,\"POS3:,_DT_NN\",0.25\n");

  const std::vector<FeatureSpace> spaces = {space};
  const std::vector<std::vector<double>> dense = {{0.25, 0.0}};
  std::ostringstream out;
  write_dense_csv(dense, spaces, out);
  EXPECT_EQ(out.str(), "chunk_id,\"POS3:,_DT_NN\",POS3:A_B_C\n0,0.25,0\n");
}

}  // namespace
}  // namespace varieties
