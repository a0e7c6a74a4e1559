#ifndef VARIETIES_TESTS_SUPPORT_KN_ORACLE_H_
#define VARIETIES_TESTS_SUPPORT_KN_ORACLE_H_

#include <array>
#include <map>
#include <string>
#include <vector>

namespace varieties::testing {

// Interpolated modified Kneser-Ney evaluated directly from the recursive
// definition over brute-force counts. Shares no code with the library
// model; the padding and count conventions are restated here.
class KnOracle {
 public:
  using Seq = std::vector<std::string>;

  KnOracle(const std::vector<Seq>& sentences, const Seq& tags, int order);

  // P(word | context); the context holds at most order - 1 symbols, oldest
  // first.
  double prob(const Seq& context, const std::string& word) const;

  // Vocabulary that can be predicted: tags plus the end marker.
  const Seq& vocabulary() const { return vocab_; }
  // Every context of length 0..order-1 seen in the padded data.
  std::vector<Seq> contexts() const;
  std::array<double, 3> discounts(int m) const { return discounts_[m - 1]; }

 private:
  long raw(const Seq& g) const;
  long adjusted(const Seq& g) const;

  int order_;
  Seq vocab_;
  std::map<Seq, long> raw_;
  std::vector<std::array<double, 3>> discounts_;
};

}  // namespace varieties::testing

#endif  // VARIETIES_TESTS_SUPPORT_KN_ORACLE_H_
