#ifndef VARIETIES_TESTS_SUPPORT_SYNTHETIC_H_
#define VARIETIES_TESTS_SUPPORT_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "varieties/corpus.h"
#include "varieties/lexicons.h"

namespace varieties::testing {

AnnotatedSentence make_sentence(const std::vector<std::string>& tokens,
                                Variety variety = Variety::kNative,
                                const std::vector<std::string>& pos = {},
                                const std::vector<std::string>& lemmas = {});

Corpus make_corpus(const std::vector<std::vector<std::string>>& sentences,
                   Variety variety = Variety::kNative);

// Function words the generator draws from, with their POS tags.
const std::vector<std::pair<std::string, std::string>>& synthetic_function_words();
WordList synthetic_function_word_list();

// Generator of variety-labeled, POS-tagged text. Each variety draws
// function words from a shared base distribution, with a block of
// variety-specific words boosted by `bias`. The blocks are disjoint across
// varieties unless `share_nn_t` is set, in which case NN and T use the
// same block (and are indistinguishable by construction).
struct SyntheticSpec {
  std::size_t sentences = 500;
  std::size_t min_length = 10;
  std::size_t max_length = 30;
  double function_word_rate = 0.45;
  double bias = 3.0;
  bool share_nn_t = false;
  std::size_t content_vocabulary = 3000;
  // Extra rate of PRP tokens added on top of the base distribution, per
  // variety; used to shift the pronoun metric.
  double extra_pronoun_rate = 0.0;
  // Zipf exponent of content words; larger means lower lexical richness.
  double content_zipf = 1.0;
  std::string country;
};

Corpus generate_variety(Variety variety, const SyntheticSpec& spec,
                        std::uint64_t seed);

}  // namespace varieties::testing

#endif  // VARIETIES_TESTS_SUPPORT_SYNTHETIC_H_
